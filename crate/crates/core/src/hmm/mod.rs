//! Left-right Gaussian hidden Markov models: segmental initialisation,
//! Baum-Welch training, forward and Viterbi scoring, and the per-category
//! classifier bank.

mod bank;
mod gaussian;
mod infer;
mod model;
mod train;

use thiserror::Error;

use crate::category::Category;
use crate::features::FeatureError;

pub use bank::{classify, observations, DegeneratePolicy, FeatureSet, HmmBank};
pub use gaussian::{floor_covariance, CovarianceKind, Gaussian};
pub use infer::{forward_loglik, viterbi};
pub use model::{GaussianHmm, Sequence, Topology, STOCHASTIC_TOL};
pub use train::{baum_welch, init_left_right, total_loglik, train_left_right, TrainConfig};

#[derive(Debug, Error)]
pub enum HmmError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("covariance is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("observation sequence is empty")]
    EmptySequence,
    #[error("sequence of length {len} is shorter than the {n_states} states")]
    TooShortSequence { len: usize, n_states: usize },
    #[error("need at least {need} training sequences, got {got}")]
    NotEnoughSequences { got: usize, need: usize },
    #[error("bank has no model for category {0}")]
    IncompleteBank(Category),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
