//! Report structures and their CSV, JSON and text renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cv::Confusion;
use super::HarnessError;
use crate::category::Category;

pub const CONFUSION_FILE: &str = "confusion.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const REPORT_FILE: &str = "report.json";
pub const TABLE_FILE: &str = "summary.txt";
pub const TIMING_FILE: &str = "timing.txt";

/// One evaluated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub classifier: String,
    pub features: String,
    pub n_states: Option<usize>,
    pub pooling: String,
    pub taxels_per_cm2: f64,
    /// Held-out condition, or `all` for cross-validation.
    pub condition: String,
    /// Rows are true categories, columns predictions.
    pub confusion: [[u32; 4]; 4],
    pub accuracy: f64,
    pub per_class_accuracy: [Option<f64>; 4],
}

impl CellReport {
    pub fn from_confusion(
        classifier: String,
        features: String,
        n_states: Option<usize>,
        pooling: String,
        taxels_per_cm2: f64,
        condition: String,
        confusion: &Confusion,
    ) -> Self {
        Self {
            classifier,
            features,
            n_states,
            pooling,
            taxels_per_cm2,
            condition,
            confusion: confusion.counts,
            accuracy: confusion.accuracy(),
            per_class_accuracy: confusion.per_class_accuracy(),
        }
    }

    pub fn key(&self) -> String {
        let states = self.n_states.map_or(String::from("-"), |n| n.to_string());
        format!("{}/{}/N={}/{}/{}", self.classifier, self.features, states, self.pooling, self.condition)
    }
}

/// Mean accuracy of one classifier over the held-out conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRow {
    pub classifier: String,
    pub features: String,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub folds: usize,
    pub trials: usize,
    pub categories: Vec<String>,
    pub cells: Vec<CellReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub means: Vec<MeanRow>,
    /// Kept out of the serialized report so reruns are byte-identical.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, folds: usize, trials: usize) -> Self {
        Self {
            experiment: experiment.to_string(),
            seed,
            folds,
            trials,
            categories: Category::ALL.iter().map(|c| c.code().to_string()).collect(),
            cells: Vec::new(),
            means: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn cell(&self, classifier: &str, features: &str) -> impl Iterator<Item = &CellReport> {
        let (classifier, features) = (classifier.to_string(), features.to_string());
        self.cells
            .iter()
            .filter(move |c| c.classifier == classifier && c.features == features)
    }

    pub fn mean(&self, classifier: &str) -> Option<f64> {
        self.means.iter().find(|m| m.classifier == classifier).map(|m| m.accuracy)
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

pub fn confusion_csv(report: &ExperimentReport) -> String {
    let mut s = String::from("cell,actual,RF,RM,SF,SM\n");
    for (i, cell) in report.cells.iter().enumerate() {
        for cat in Category::ALL {
            let row = cell.confusion[cat.index()];
            let _ = writeln!(s, "{i},{},{},{},{},{}", cat.code(), row[0], row[1], row[2], row[3]);
        }
    }
    s
}

pub fn summary_csv(report: &ExperimentReport) -> String {
    let mut s = String::from("cell,classifier,features,n_states,pooling,taxels_per_cm2,condition,accuracy,RF,RM,SF,SM\n");
    for (i, c) in report.cells.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{},{},{},{},{},{}",
            c.classifier,
            c.features,
            c.n_states.map_or(String::new(), |n| n.to_string()),
            c.pooling,
            c.taxels_per_cm2,
            c.condition,
            c.accuracy,
            opt(c.per_class_accuracy[0]),
            opt(c.per_class_accuracy[1]),
            opt(c.per_class_accuracy[2]),
            opt(c.per_class_accuracy[3]),
        );
    }
    for m in &report.means {
        let _ = writeln!(s, "mean,{},{},,,,mean,{},,,,", m.classifier, m.features, m.accuracy);
    }
    s
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

/// Plain-text tables with accuracies in percent, two decimals.
pub fn human_table(report: &ExperimentReport) -> String {
    let mut s = format!(
        "{}: {} trials, {} folds, seed {}\n\n",
        report.experiment, report.trials, report.folds, report.seed
    );
    let header = ["classifier", "features", "N", "pooling", "taxels/cm2", "condition", "accuracy %"];
    let rows: Vec<[String; 7]> = report
        .cells
        .iter()
        .map(|c| {
            [
                c.classifier.clone(),
                c.features.clone(),
                c.n_states.map_or("-".into(), |n| n.to_string()),
                c.pooling.clone(),
                format!("{:.3}", c.taxels_per_cm2),
                c.condition.clone(),
                pct(c.accuracy),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for r in &rows {
        for (w, v) in widths.iter_mut().zip(r) {
            *w = (*w).max(v.len());
        }
    }
    let line = |cols: &[String]| {
        let cells: Vec<String> = cols.iter().zip(widths).map(|(v, w)| format!("{v:<w$}")).collect();
        cells.join("  ").trim_end().to_string() + "\n"
    };
    s += &line(&header.map(String::from));
    s += &line(&widths.map(|w| "-".repeat(w)));
    for r in &rows {
        s += &line(r);
    }
    if !report.means.is_empty() {
        s += "\nmean over held-out conditions\n";
        for m in &report.means {
            let _ = writeln!(s, "  {:<18} {:<14} {}", m.classifier, m.features, pct(m.accuracy));
        }
    }
    for (i, c) in report.cells.iter().enumerate() {
        let _ = writeln!(s, "\n[{i}] {}", c.key());
        s += "      RF   RM   SF   SM\n";
        for cat in Category::ALL {
            let row = c.confusion[cat.index()];
            let _ = writeln!(s, "  {} {:>4} {:>4} {:>4} {:>4}", cat.code(), row[0], row[1], row[2], row[3]);
        }
    }
    s
}

/// Writes every deterministic report file into `dir`.
pub fn write_reports(report: &ExperimentReport, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(CONFUSION_FILE), confusion_csv(report))?;
    fs::write(dir.join(SUMMARY_FILE), summary_csv(report))?;
    fs::write(dir.join(REPORT_FILE), report.to_json()?)?;
    fs::write(dir.join(TABLE_FILE), human_table(report))?;
    Ok(())
}
