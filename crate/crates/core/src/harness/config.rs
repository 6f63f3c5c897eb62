//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # five-fold CV of the univariate banks
//! experiment = cv4
//! dataset = generate
//! conditions = nominal
//! trials_per_cell = 20
//! feature_sets = force, area
//! n_states = 10
//! seed = 7
//! output = out/cv4
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::HarnessError;
use crate::features::DEFAULT_WINDOW_S;
use crate::hmm::{CovarianceKind, FeatureSet, TrainConfig};
use crate::taxel::{Connectivity, Pooling};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Cv4,
    ResolutionSweep,
    StateSweep,
    MultivariateCv,
    BaselineCv,
    Generalization,
}

impl ExperimentKind {
    pub fn code(self) -> &'static str {
        match self {
            ExperimentKind::Cv4 => "cv4",
            ExperimentKind::ResolutionSweep => "resolution_sweep",
            ExperimentKind::StateSweep => "state_sweep",
            ExperimentKind::MultivariateCv => "multivariate_cv",
            ExperimentKind::BaselineCv => "baseline_cv",
            ExperimentKind::Generalization => "generalization",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "cv4" => ExperimentKind::Cv4,
            "resolution_sweep" => ExperimentKind::ResolutionSweep,
            "state_sweep" => ExperimentKind::StateSweep,
            "multivariate_cv" => ExperimentKind::MultivariateCv,
            "baseline_cv" => ExperimentKind::BaselineCv,
            "generalization" => ExperimentKind::Generalization,
            other => return Err(format!("unknown experiment `{other}`")),
        })
    }
}

/// Condition grid of a generated dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionSet {
    Nominal,
    Varied,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    /// Directory holding a manifest and trial files.
    Path(PathBuf),
    Generate {
        conditions: ConditionSet,
        trials_per_cell: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub dataset: DatasetSource,
    pub folds: usize,
    pub n_states: Vec<usize>,
    pub pooling: Vec<Pooling>,
    pub feature_sets: Vec<FeatureSet>,
    pub seed: u64,
    pub output: PathBuf,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub variance_floor: f64,
    pub covariance: CovarianceKind,
    pub connectivity: Connectivity,
    pub window_s: f64,
    pub pca_components: usize,
    pub knn_k: usize,
}

impl ExperimentConfig {
    /// Defaults for `kind`; each experiment gets the lists it sweeps.
    pub fn new(kind: ExperimentKind) -> Self {
        let (conditions, feature_sets, n_states, pooling) = match kind {
            ExperimentKind::Cv4 => (
                ConditionSet::Nominal,
                vec![FeatureSet::Force, FeatureSet::Area],
                vec![10],
                vec![Pooling::Block(1)],
            ),
            ExperimentKind::ResolutionSweep => (
                ConditionSet::Nominal,
                vec![FeatureSet::Force, FeatureSet::Area],
                vec![10],
                vec![
                    Pooling::Block(1),
                    Pooling::Block(2),
                    Pooling::Block(4),
                    Pooling::Block(8),
                    Pooling::Full,
                ],
            ),
            ExperimentKind::StateSweep => (
                ConditionSet::Nominal,
                vec![FeatureSet::Force],
                vec![10, 15, 20, 30, 50, 100],
                vec![Pooling::Block(1)],
            ),
            ExperimentKind::MultivariateCv => (
                ConditionSet::Nominal,
                vec![FeatureSet::ForceMotion, FeatureSet::Force],
                vec![10],
                vec![Pooling::Block(1)],
            ),
            ExperimentKind::BaselineCv => (
                ConditionSet::Nominal,
                vec![FeatureSet::Force, FeatureSet::Area],
                vec![10],
                vec![Pooling::Block(1)],
            ),
            ExperimentKind::Generalization => (
                ConditionSet::Varied,
                vec![FeatureSet::Force, FeatureSet::ForceMotion],
                vec![10],
                vec![Pooling::Block(1)],
            ),
        };
        let train = TrainConfig::default();
        Self {
            kind,
            dataset: DatasetSource::Generate {
                conditions,
                trials_per_cell: 20,
            },
            folds: 5,
            n_states,
            pooling,
            feature_sets,
            seed: 0,
            output: PathBuf::from("report"),
            max_iterations: train.max_iterations,
            tolerance: train.tolerance,
            variance_floor: train.variance_floor,
            covariance: train.covariance,
            connectivity: Connectivity::Four,
            window_s: DEFAULT_WINDOW_S,
            pca_components: 3,
            knn_k: 1,
        }
    }

    pub fn train_config(&self, n_states: usize) -> TrainConfig {
        TrainConfig {
            n_states,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            variance_floor: self.variance_floor,
            covariance: self.covariance,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |field: &str, message: &str| {
            Err(HarnessError::Config {
                line: 0,
                field: field.to_string(),
                message: message.to_string(),
            })
        };
        if self.folds < 2 {
            return bad("folds", "must be >= 2");
        }
        if self.n_states.is_empty() || self.n_states.contains(&0) {
            return bad("n_states", "must be a non-empty list of positive counts");
        }
        if self.pooling.is_empty() {
            return bad("pooling", "must be non-empty");
        }
        if self.feature_sets.is_empty() {
            return bad("feature_sets", "must be non-empty");
        }
        if let DatasetSource::Generate { trials_per_cell: 0, .. } = self.dataset {
            return bad("trials_per_cell", "must be >= 1");
        }
        if self.pca_components == 0 {
            return bad("pca_components", "must be >= 1");
        }
        if self.knn_k == 0 {
            return bad("knn_k", "must be >= 1");
        }
        if !(self.window_s > 0.0) {
            return bad("window_s", "must be > 0");
        }
        self.train_config(self.n_states[0])
            .validate()
            .or_else(|e| bad("training", &e.to_string()))
    }

    /// Parses a config file. `experiment` is required; every other key has
    /// a default that depends on the experiment.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(HarnessError::Config {
                    line: i + 1,
                    field: line.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            pairs.push((i + 1, key.trim().to_string(), value.trim().to_string()));
        }
        let Some((_, _, kind)) = pairs.iter().find(|(_, k, _)| k == "experiment") else {
            return Err(HarnessError::Config {
                line: 0,
                field: "experiment".into(),
                message: "missing required key".into(),
            });
        };
        let kind_line = pairs.iter().find(|(_, k, _)| k == "experiment").map_or(0, |p| p.0);
        let kind: ExperimentKind = kind.parse().map_err(|message| HarnessError::Config {
            line: kind_line,
            field: "experiment".into(),
            message,
        })?;
        let mut cfg = Self::new(kind);
        let mut dataset_path: Option<PathBuf> = None;
        let (mut conditions, mut trials) = match cfg.dataset {
            DatasetSource::Generate {
                conditions,
                trials_per_cell,
            } => (conditions, trials_per_cell),
            DatasetSource::Path(_) => unreachable!("defaults always generate"),
        };

        for (line, key, value) in &pairs {
            let err = |message: String| HarnessError::Config {
                line: *line,
                field: key.clone(),
                message,
            };
            let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("`{v}` is not a number")));
            let count = |v: &str| v.parse::<usize>().map_err(|_| err(format!("`{v}` is not a count")));
            let list = |v: &str| v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect::<Vec<_>>();
            match key.as_str() {
                "experiment" => {}
                "dataset" => {
                    dataset_path = (value != "generate").then(|| PathBuf::from(value));
                }
                "conditions" => {
                    conditions = match value.as_str() {
                        "nominal" => ConditionSet::Nominal,
                        "varied" => ConditionSet::Varied,
                        other => return Err(err(format!("expected nominal or varied, got `{other}`"))),
                    }
                }
                "trials_per_cell" => trials = count(value)?,
                "folds" => cfg.folds = count(value)?,
                "n_states" => cfg.n_states = list(value).iter().map(|v| count(v)).collect::<Result<_, _>>()?,
                "pooling" => {
                    cfg.pooling = list(value)
                        .iter()
                        .map(|v| Pooling::parse(v).ok_or_else(|| err(format!("invalid pooling `{v}`"))))
                        .collect::<Result<_, _>>()?
                }
                "feature_sets" | "feature_set" => {
                    cfg.feature_sets = list(value)
                        .iter()
                        .map(|v| v.parse::<FeatureSet>().map_err(|e| err(e.to_string())))
                        .collect::<Result<_, _>>()?
                }
                "seed" => cfg.seed = value.parse().map_err(|_| err(format!("`{value}` is not a seed")))?,
                "output" => cfg.output = PathBuf::from(value),
                "max_iterations" => cfg.max_iterations = count(value)?,
                "tolerance" => cfg.tolerance = num(value)?,
                "variance_floor" => cfg.variance_floor = num(value)?,
                "covariance" => {
                    cfg.covariance = match value.as_str() {
                        "full" => CovarianceKind::Full,
                        "diagonal" => CovarianceKind::Diagonal,
                        other => return Err(err(format!("expected full or diagonal, got `{other}`"))),
                    }
                }
                "connectivity" => {
                    cfg.connectivity = match value.as_str() {
                        "4" => Connectivity::Four,
                        "8" => Connectivity::Eight,
                        other => return Err(err(format!("expected 4 or 8, got `{other}`"))),
                    }
                }
                "window_s" => cfg.window_s = num(value)?,
                "pca_components" => cfg.pca_components = count(value)?,
                "knn_k" => cfg.knn_k = count(value)?,
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        cfg.dataset = match dataset_path {
            Some(p) => DatasetSource::Path(p),
            None => DatasetSource::Generate {
                conditions,
                trials_per_cell: trials,
            },
        };
        // Attach line numbers to semantic errors where the key is known.
        cfg.validate().map_err(|e| match e {
            HarnessError::Config { field, message, .. } => {
                let line = pairs.iter().rev().find(|(_, k, _)| *k == field).map_or(0, |p| p.0);
                HarnessError::Config { line, field, message }
            }
            other => other,
        })?;
        Ok(cfg)
    }
}
