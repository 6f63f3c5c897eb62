//! Train/test splits, the two classifier families, and confusion counting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::HarnessError;
use crate::baseline::{vectorize, Channel, PcaKnn};
use crate::category::Category;
use crate::features::FeatureSeries;
use crate::hmm::{observations, DegeneratePolicy, FeatureSet, HmmBank, TrainConfig};

/// Rows are true categories, columns predictions, both in category order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub counts: [[u32; 4]; 4],
}

impl Confusion {
    pub fn record(&mut self, actual: Category, predicted: Category) {
        self.counts[actual.index()][predicted.index()] += 1;
    }

    pub fn add(&mut self, other: &Confusion) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (c, v) in row.iter_mut().zip(o) {
                *c += v;
            }
        }
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u32 {
        (0..4).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_total(&self, actual: Category) -> u32 {
        self.counts[actual.index()].iter().sum()
    }

    /// Fraction correct; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.correct() as f64 / n as f64,
        }
    }

    /// Recall of each category; `None` for categories with no trials.
    pub fn per_class_accuracy(&self) -> [Option<f64>; 4] {
        let mut out = [None; 4];
        for cat in Category::ALL {
            let n = self.row_total(cat);
            if n > 0 {
                out[cat.index()] = Some(self.counts[cat.index()][cat.index()] as f64 / n as f64);
            }
        }
        out
    }
}

/// Assigns each item to one of `k` folds, stratified by category.
///
/// Each category's items are shuffled with a seeded generator and dealt
/// round-robin, so fold sizes per category differ by at most one.
pub fn stratified_folds(labels: &[Category], k: usize, seed: u64) -> Result<Vec<usize>, HarnessError> {
    if k < 2 {
        return Err(HarnessError::InsufficientData(format!("need at least 2 folds, got {k}")));
    }
    let mut fold = vec![0; labels.len()];
    for cat in Category::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == cat).collect();
        if members.len() < k {
            return Err(HarnessError::InsufficientData(format!(
                "category {cat} has {} trials, fewer than {k} folds",
                members.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(cat.index() as u64);
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            fold[i] = j % k;
        }
    }
    Ok(fold)
}

/// A train/test partition of trial indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn fold_splits(fold_of: &[usize], k: usize) -> Vec<Split> {
    (0..k)
        .map(|f| Split {
            train: (0..fold_of.len()).filter(|&i| fold_of[i] != f).collect(),
            test: (0..fold_of.len()).filter(|&i| fold_of[i] == f).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Hmm { set: FeatureSet, n_states: usize },
    Baseline { channels: Vec<Channel>, scaled: bool },
}

impl Classifier {
    pub fn family(&self) -> &'static str {
        match self {
            Classifier::Hmm { set, .. } if set.dim() > 1 => "multivariate-hmm",
            Classifier::Hmm { .. } => "univariate-hmm",
            Classifier::Baseline { channels, .. } if channels.len() > 1 => "pca-knn-2",
            Classifier::Baseline { .. } => "pca-knn-1",
        }
    }

    pub fn features(&self) -> String {
        match self {
            Classifier::Hmm { set, .. } => set.code().to_string(),
            Classifier::Baseline { channels, .. } => channels
                .iter()
                .map(|c| match c {
                    Channel::Force => "force",
                    Channel::Area => "area",
                    Channel::Motion => "motion",
                })
                .collect::<Vec<_>>()
                .join("+"),
        }
    }

    pub fn n_states(&self) -> Option<usize> {
        match self {
            Classifier::Hmm { n_states, .. } => Some(*n_states),
            Classifier::Baseline { .. } => None,
        }
    }
}

/// Shared settings for fitting either classifier family.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub train: TrainConfig,
    pub pca_components: usize,
    pub knn_k: usize,
    pub window: usize,
}

/// Fits `classifier` on `split.train` and tallies its predictions on
/// `split.test`.
pub fn evaluate_split(
    classifier: &Classifier,
    settings: &FitSettings,
    features: &[FeatureSeries],
    labels: &[Category],
    split: &Split,
) -> Result<Confusion, HarnessError> {
    let mut confusion = Confusion::default();
    match classifier {
        Classifier::Hmm { set, n_states } => {
            let seq = |i: usize| observations(&features[i], *set, DegeneratePolicy::Zero);
            let samples = split
                .train
                .iter()
                .map(|&i| Ok((labels[i], seq(i)?)))
                .collect::<Result<Vec<_>, HarnessError>>()?;
            let cfg = settings.train.with_states(*n_states);
            let bank = HmmBank::train(*set, &samples, &cfg)?;
            for &i in &split.test {
                let (predicted, _) = bank.classify_sequence(&seq(i)?)?;
                confusion.record(labels[i], predicted);
            }
        }
        Classifier::Baseline { channels, scaled } => {
            let vec_of = |i: usize| vectorize(&features[i], channels, settings.window, *scaled);
            let samples = split
                .train
                .iter()
                .map(|&i| Ok((vec_of(i)?, labels[i])))
                .collect::<Result<Vec<_>, HarnessError>>()?;
            let model = PcaKnn::fit(&samples, settings.pca_components, settings.knn_k)?;
            for &i in &split.test {
                confusion.record(labels[i], model.classify(&vec_of(i)?)?);
            }
        }
    }
    Ok(confusion)
}

/// One configuration to evaluate: which feature table, which classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub variant: usize,
    pub classifier: Classifier,
}

/// Evaluates every (cell, split) pair in parallel; the result is indexed
/// `[cell][split]` regardless of scheduling.
pub fn evaluate_cells(
    cells: &[Cell],
    splits: &[Split],
    variants: &[Vec<FeatureSeries>],
    labels: &[Category],
    settings: &FitSettings,
) -> Result<Vec<Vec<Confusion>>, HarnessError> {
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..splits.len()).map(move |s| (c, s)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(c, s)| {
            let cell = &cells[c];
            evaluate_split(&cell.classifier, settings, &variants[cell.variant], labels, &splits[s]).map_err(|e| {
                HarnessError::Cell {
                    cell: format!("{} [{}] split {s}", cell.classifier.family(), cell.classifier.features()),
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(results.chunks(splits.len().max(1)).map(|c| c.to_vec()).collect())
}

/// Stratified k-fold cross-validation of one classifier.
pub fn cross_validate(
    classifier: &Classifier,
    settings: &FitSettings,
    features: &[FeatureSeries],
    labels: &[Category],
    folds: usize,
    seed: u64,
) -> Result<Confusion, HarnessError> {
    let splits = fold_splits(&stratified_folds(labels, folds, seed)?, folds);
    let cell = Cell {
        variant: 0,
        classifier: classifier.clone(),
    };
    let per_split = evaluate_cells(&[cell], &splits, &[features.to_vec()], labels, settings)?;
    let mut total = Confusion::default();
    per_split[0].iter().for_each(|c| total.add(c));
    Ok(total)
}
