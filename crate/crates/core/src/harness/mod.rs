//! Configuration-driven experiment runner.

mod config;
mod cv;
mod experiments;
mod report;

pub use config::{ConditionSet, DatasetSource, ExperimentConfig, ExperimentKind};
pub use cv::{
    cross_validate, evaluate_cells, evaluate_split, fold_splits, stratified_folds, Cell, Classifier, Confusion,
    FitSettings, Split,
};
pub use experiments::{condition_splits, extract_table, run_experiment, FeatureTable};
pub use report::{
    confusion_csv, human_table, summary_csv, write_reports, CellReport, ExperimentReport, MeanRow, CONFUSION_FILE,
    REPORT_FILE, SUMMARY_FILE, TABLE_FILE, TIMING_FILE,
};

use std::time::Instant;

use crate::baseline::BaselineError;
use crate::features::FeatureError;
use crate::hmm::HmmError;
use crate::sim::{generate_dataset, Dataset, DatasetSpec, GeneratorConfig, SimError};
use crate::taxel::TaxelError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config line {line}, `{field}`: {message}")]
    Config { line: usize, field: String, message: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("{file}: {source}")]
    Trial {
        file: String,
        #[source]
        source: FeatureError,
    },
    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<HarnessError>,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Taxel(#[from] TaxelError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Hmm(#[from] HmmError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Loads the configured dataset, or generates it from the default generator.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset, HarnessError> {
    match &cfg.dataset {
        DatasetSource::Path(p) => Ok(Dataset::read(p)?),
        DatasetSource::Generate {
            conditions,
            trials_per_cell,
        } => {
            let spec = match conditions {
                ConditionSet::Nominal => DatasetSpec::stereotyped(*trials_per_cell),
                ConditionSet::Varied => DatasetSpec::varied(*trials_per_cell),
            };
            Ok(generate_dataset(&spec, &GeneratorConfig::default(), cfg.seed)?)
        }
    }
}

/// Loads the dataset, runs the experiment and writes the reports to
/// `cfg.output`. Wall time goes to a separate file so reports stay
/// byte-identical between runs.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let start = Instant::now();
    let dataset = load_dataset(cfg)?;
    let mut report = run_experiment(cfg, &dataset)?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    write_reports(&report, &cfg.output)?;
    std::fs::write(cfg.output.join(TIMING_FILE), format!("{:.3}\n", report.wall_time_s))?;
    log::info!("{} finished in {:.1} s", cfg.kind, report.wall_time_s);
    Ok(report)
}
