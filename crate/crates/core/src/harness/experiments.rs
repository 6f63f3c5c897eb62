//! The experiments: what gets extracted, which classifiers run, and how the
//! data is split.

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::cv::{evaluate_cells, fold_splits, stratified_folds, Cell, Classifier, Confusion, FitSettings, Split};
use super::report::{CellReport, ExperimentReport, MeanRow};
use super::HarnessError;
use crate::baseline::Channel;
use crate::category::{Category, Condition};
use crate::features::{extract_features, ExtractOptions, FeatureSeries};
use crate::hmm::FeatureSet;
use crate::sim::Dataset;
use crate::taxel::Pooling;

/// Features of every trial at one pooling level.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub pooling: Pooling,
    pub taxels_per_cm2: f64,
    pub features: Vec<FeatureSeries>,
}

/// Re-pools each trial, then extracts its features. Trials are processed in
/// parallel; order follows the dataset.
pub fn extract_table(dataset: &Dataset, pooling: Pooling, opts: &ExtractOptions) -> Result<FeatureTable, HarnessError> {
    let rows = dataset
        .entries
        .par_iter()
        .map(|e| {
            let trial = e.trial.pooled(pooling)?;
            let density = trial.frames().first().map_or(0.0, |f| f.taxels_per_cm2());
            let fs = extract_features(&trial, opts, e.arm_position.as_deref()).map_err(|source| {
                HarnessError::Trial {
                    file: e.file.clone(),
                    source,
                }
            })?;
            Ok((fs, density))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let taxels_per_cm2 = rows.first().map_or(0.0, |r| r.1);
    Ok(FeatureTable {
        pooling,
        taxels_per_cm2,
        features: rows.into_iter().map(|r| r.0).collect(),
    })
}

fn hmm(set: FeatureSet, n_states: usize) -> Classifier {
    Classifier::Hmm { set, n_states }
}

/// Condition-independent classifiers of the comparison experiments.
fn baselines(kind: ExperimentKind) -> Vec<Classifier> {
    let second = match kind {
        ExperimentKind::Generalization => Channel::Motion,
        _ => Channel::Area,
    };
    vec![
        Classifier::Baseline {
            channels: vec![Channel::Force],
            scaled: false,
        },
        Classifier::Baseline {
            channels: vec![Channel::Force, second],
            scaled: second == Channel::Motion,
        },
    ]
}

/// Runs the configured experiment on an already loaded dataset.
pub fn run_experiment(cfg: &ExperimentConfig, dataset: &Dataset) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(HarnessError::InsufficientData("dataset is empty".into()));
    }
    let opts = ExtractOptions {
        window_s: cfg.window_s,
        connectivity: cfg.connectivity,
    };
    let labels: Vec<Category> = dataset.entries.iter().map(|e| e.category).collect();
    let poolings: Vec<Pooling> = match cfg.kind {
        ExperimentKind::ResolutionSweep => cfg.pooling.clone(),
        _ => vec![cfg.pooling[0]],
    };
    let tables = poolings
        .iter()
        .map(|&p| extract_table(dataset, p, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    let window = tables[0].features.first().map_or(0, FeatureSeries::len);

    let n0 = cfg.n_states[0];
    let mut cells = Vec::new();
    match cfg.kind {
        ExperimentKind::Cv4 | ExperimentKind::MultivariateCv => {
            for &set in &cfg.feature_sets {
                for &n in &cfg.n_states {
                    cells.push(Cell { variant: 0, classifier: hmm(set, n) });
                }
            }
        }
        ExperimentKind::ResolutionSweep => {
            for variant in 0..tables.len() {
                for &set in &cfg.feature_sets {
                    cells.push(Cell { variant, classifier: hmm(set, n0) });
                }
            }
        }
        ExperimentKind::StateSweep => {
            for &n in &cfg.n_states {
                for &set in &cfg.feature_sets {
                    cells.push(Cell { variant: 0, classifier: hmm(set, n) });
                }
            }
        }
        ExperimentKind::BaselineCv => {
            for classifier in baselines(cfg.kind) {
                cells.push(Cell { variant: 0, classifier });
            }
        }
        ExperimentKind::Generalization => {
            for classifier in baselines(cfg.kind) {
                cells.push(Cell { variant: 0, classifier });
            }
            for &set in &cfg.feature_sets {
                cells.push(Cell { variant: 0, classifier: hmm(set, n0) });
            }
        }
    }

    let (splits, split_names, pooled_over_splits) = match cfg.kind {
        ExperimentKind::Generalization => {
            let (splits, names) = condition_splits(dataset)?;
            (splits, names, false)
        }
        _ => {
            let fold = stratified_folds(&labels, cfg.folds, cfg.seed)?;
            (fold_splits(&fold, cfg.folds), vec!["all".to_string()], true)
        }
    };

    let settings = FitSettings {
        train: cfg.train_config(n0),
        pca_components: cfg.pca_components,
        knn_k: cfg.knn_k,
        window,
    };
    let variants: Vec<Vec<FeatureSeries>> = tables.iter().map(|t| t.features.clone()).collect();
    let results = evaluate_cells(&cells, &splits, &variants, &labels, &settings)?;

    let folds = if pooled_over_splits { cfg.folds } else { splits.len() };
    let mut report = ExperimentReport::new(cfg.kind.code(), cfg.seed, folds, dataset.len());
    for (cell, per_split) in cells.iter().zip(&results) {
        let table = &tables[cell.variant];
        let make = |condition: &str, confusion: &Confusion| {
            CellReport::from_confusion(
                cell.classifier.family().to_string(),
                cell.classifier.features(),
                cell.classifier.n_states(),
                table.pooling.to_string(),
                table.taxels_per_cm2,
                condition.to_string(),
                confusion,
            )
        };
        if pooled_over_splits {
            let mut total = Confusion::default();
            per_split.iter().for_each(|c| total.add(c));
            report.cells.push(make("all", &total));
        } else {
            for (name, confusion) in split_names.iter().zip(per_split) {
                report.cells.push(make(name, confusion));
            }
            let mean = per_split.iter().map(Confusion::accuracy).sum::<f64>() / per_split.len() as f64;
            report.means.push(MeanRow {
                classifier: cell.classifier.family().to_string(),
                features: cell.classifier.features(),
                accuracy: mean,
            });
        }
    }
    Ok(report)
}

/// One split per condition present: train on the others, test on it.
pub fn condition_splits(dataset: &Dataset) -> Result<(Vec<Split>, Vec<String>), HarnessError> {
    let mut conditions: Vec<Condition> = Vec::new();
    for e in &dataset.entries {
        if !conditions.contains(&e.condition) {
            conditions.push(e.condition);
        }
    }
    conditions.sort_by_key(|c| (c.velocity.code(), c.stiffness.code()));
    if conditions.len() < 2 {
        return Err(HarnessError::InsufficientData(
            "leave-one-condition-out needs at least two conditions".into(),
        ));
    }
    let splits = conditions
        .iter()
        .map(|&held| Split {
            train: (0..dataset.len()).filter(|&i| dataset.entries[i].condition != held).collect(),
            test: (0..dataset.len()).filter(|&i| dataset.entries[i].condition == held).collect(),
        })
        .collect();
    Ok((splits, conditions.iter().map(|c| c.to_string()).collect()))
}
