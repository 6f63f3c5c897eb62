//! One trained model per object category, scored against new trials with
//! Viterbi.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use super::infer::viterbi;
use super::model::{GaussianHmm, Sequence};
use super::train::{train_left_right, TrainConfig};
use super::HmmError;
use crate::category::Category;
use crate::features::{scale_features, FeatureError, FeatureSeries};

/// Which observations a bank models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureSet {
    /// Raw maximum force, univariate.
    Force,
    /// Raw contact area, univariate.
    Area,
    /// Per-trial z-scored maximum force and contact motion, bivariate.
    ForceMotion,
}

impl FeatureSet {
    pub fn dim(self) -> usize {
        match self {
            FeatureSet::Force | FeatureSet::Area => 1,
            FeatureSet::ForceMotion => 2,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            FeatureSet::Force => "force",
            FeatureSet::Area => "area",
            FeatureSet::ForceMotion => "force+motion",
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for FeatureSet {
    type Err = HmmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "force" => Ok(FeatureSet::Force),
            "area" => Ok(FeatureSet::Area),
            "force+motion" | "force_motion" | "multivariate" => Ok(FeatureSet::ForceMotion),
            other => Err(HmmError::InvalidConfig(format!("unknown feature set `{other}`"))),
        }
    }
}

/// What to do when a channel that must be z-scored is constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneratePolicy {
    /// Propagate [`FeatureError::DegenerateSeries`].
    #[default]
    Fail,
    /// Replace the channel by zeros (its centred value).
    Zero,
}

/// Builds the observation sequence a bank of the given feature set consumes.
pub fn observations(
    features: &FeatureSeries,
    set: FeatureSet,
    policy: DegeneratePolicy,
) -> Result<Sequence, FeatureError> {
    let scaled = |v: &[f64]| -> Result<Vec<f64>, FeatureError> {
        match scale_features(v) {
            Ok(s) => Ok(s.values),
            Err(FeatureError::DegenerateSeries { .. }) if policy == DegeneratePolicy::Zero => {
                Ok(vec![0.0; v.len()])
            }
            Err(e) => Err(e),
        }
    };
    Ok(match set {
        FeatureSet::Force => Sequence::univariate(features.f_max.clone()),
        FeatureSet::Area => Sequence::univariate(features.area.clone()),
        FeatureSet::ForceMotion => {
            let f = scaled(&features.f_max)?;
            let d = scaled(&features.d)?;
            Sequence::from_channels(&[&f, &d]).expect("feature channels share a length")
        }
    })
}

/// A complete set of per-category models for one feature set.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmBank {
    feature_set: FeatureSet,
    models: Vec<GaussianHmm>,
}

impl HmmBank {
    /// `models` is indexed by [`Category::index`].
    pub fn new(feature_set: FeatureSet, models: Vec<GaussianHmm>) -> Result<Self, HmmError> {
        if models.len() != Category::ALL.len() {
            let missing = Category::from_index(models.len()).unwrap_or(Category::SoftMovable);
            return Err(HmmError::IncompleteBank(missing));
        }
        for m in &models {
            if m.dim() != feature_set.dim() {
                return Err(HmmError::DimensionMismatch {
                    expected: feature_set.dim(),
                    actual: m.dim(),
                });
            }
        }
        Ok(Self { feature_set, models })
    }

    /// Trains one left-right model per category. Categories train in parallel.
    pub fn train(
        feature_set: FeatureSet,
        samples: &[(Category, Sequence)],
        cfg: &TrainConfig,
    ) -> Result<Self, HmmError> {
        let models = Category::ALL
            .par_iter()
            .map(|&cat| {
                let seqs: Vec<Sequence> = samples
                    .iter()
                    .filter(|(c, _)| *c == cat)
                    .map(|(_, s)| s.clone())
                    .collect();
                if seqs.is_empty() {
                    return Err(HmmError::IncompleteBank(cat));
                }
                train_left_right(&seqs, cfg)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(feature_set, models)
    }

    pub fn feature_set(&self) -> FeatureSet {
        self.feature_set
    }

    pub fn model(&self, category: Category) -> &GaussianHmm {
        &self.models[category.index()]
    }

    /// Viterbi log-probability of `seq` under each category model.
    pub fn scores(&self, seq: &Sequence) -> Result<[f64; 4], HmmError> {
        let mut out = [0.0; 4];
        for (slot, m) in out.iter_mut().zip(&self.models) {
            *slot = viterbi(m, seq)?.1;
        }
        Ok(out)
    }

    /// Writes one model file per category, `<feature_set>_<CODE>.hmm`.
    pub fn save(&self, dir: &Path) -> Result<(), HmmError> {
        std::fs::create_dir_all(dir)?;
        for (cat, m) in Category::ALL.iter().zip(&self.models) {
            let f = File::create(dir.join(Self::file_name(self.feature_set, *cat)))?;
            let mut w = BufWriter::new(f);
            m.write_to(&mut w)?;
            w.flush()?;
        }
        Ok(())
    }

    pub fn load(dir: &Path, feature_set: FeatureSet) -> Result<Self, HmmError> {
        let models = Category::ALL
            .iter()
            .map(|&cat| {
                let path = dir.join(Self::file_name(feature_set, cat));
                let f = File::open(&path).map_err(|_| HmmError::IncompleteBank(cat))?;
                GaussianHmm::read_from(BufReader::new(f))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(feature_set, models)
    }

    pub fn file_name(feature_set: FeatureSet, category: Category) -> String {
        let set = match feature_set {
            FeatureSet::Force => "force",
            FeatureSet::Area => "area",
            FeatureSet::ForceMotion => "force_motion",
        };
        format!("{set}_{}.hmm", category.code())
    }

    /// Highest-scoring category; ties resolve to the earliest category.
    pub fn classify_sequence(&self, seq: &Sequence) -> Result<(Category, [f64; 4]), HmmError> {
        let scores = self.scores(seq)?;
        Ok((argmax_category(&scores), scores))
    }
}

pub(crate) fn argmax_category(scores: &[f64; 4]) -> Category {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    Category::ALL[best]
}

/// Classifies a trial's features with the bank's feature set. A constant
/// channel in a z-scored feature set is an error.
pub fn classify(bank: &HmmBank, features: &FeatureSeries) -> Result<(Category, [f64; 4]), HmmError> {
    let seq = observations(features, bank.feature_set, DegeneratePolicy::Fail)?;
    bank.classify_sequence(&seq)
}
