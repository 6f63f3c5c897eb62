//! Segmental initialisation and Baum-Welch re-estimation.

use super::gaussian::{CovarianceKind, Gaussian};
use super::infer::{backward_table, emission_log_probs, forward_table, log_sum_exp, predecessors};
use super::model::{GaussianHmm, Sequence, Topology};
use super::HmmError;
use crate::features::time_normalize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub n_states: usize,
    pub max_iterations: usize,
    /// Convergence threshold on the log-likelihood change, per observation.
    pub tolerance: f64,
    pub variance_floor: f64,
    pub covariance: CovarianceKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_states: 10,
            max_iterations: 200,
            tolerance: 1e-4,
            variance_floor: 1e-6,
            covariance: CovarianceKind::Full,
        }
    }
}

impl TrainConfig {
    pub fn with_states(self, n_states: usize) -> Self {
        Self { n_states, ..self }
    }

    pub fn validate(&self) -> Result<(), HmmError> {
        if self.n_states < 2 {
            return Err(HmmError::InvalidConfig(format!("n_states must be >= 2 (got {})", self.n_states)));
        }
        if !(self.tolerance > 0.0) {
            return Err(HmmError::InvalidConfig(format!("tolerance must be > 0 (got {})", self.tolerance)));
        }
        if !(self.variance_floor > 0.0) {
            return Err(HmmError::InvalidConfig(format!(
                "variance floor must be > 0 (got {})",
                self.variance_floor
            )));
        }
        Ok(())
    }
}

/// Builds the starting left-right model: every sequence is stretched to a
/// common length and cut into `n_states` equal contiguous parts, and state
/// `j` gets the Gaussian fitted to part `j` pooled over all sequences.
pub fn init_left_right(training: &[Sequence], cfg: &TrainConfig) -> Result<GaussianHmm, HmmError> {
    cfg.validate()?;
    if training.len() < 2 {
        return Err(HmmError::NotEnoughSequences {
            got: training.len(),
            need: 2,
        });
    }
    let dim = training[0].dim();
    for s in training {
        if s.dim() != dim {
            return Err(HmmError::DimensionMismatch {
                expected: dim,
                actual: s.dim(),
            });
        }
        if s.len() < cfg.n_states {
            return Err(HmmError::TooShortSequence {
                len: s.len(),
                n_states: cfg.n_states,
            });
        }
    }
    let len = training.iter().map(Sequence::len).max().unwrap_or(0);
    let normalized = training
        .iter()
        .map(|s| {
            if s.len() == len {
                return Ok(s.clone());
            }
            let channels = (0..dim)
                .map(|k| time_normalize(&s.channel(k), len))
                .collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&[f64]> = channels.iter().map(Vec::as_slice).collect();
            Sequence::from_channels(&refs)
        })
        .collect::<Result<Vec<_>, HmmError>>()?;

    let n = cfg.n_states;
    let mut emissions = Vec::with_capacity(n);
    for j in 0..n {
        let (lo, hi) = (j * len / n, (j + 1) * len / n);
        let points = normalized
            .iter()
            .flat_map(move |s| (lo..hi).map(move |t| (s.obs(t), 1.0)));
        let g = Gaussian::fit_weighted(points, dim, cfg.variance_floor, cfg.covariance)
            .ok_or(HmmError::TooShortSequence { len, n_states: n })??;
        emissions.push(g);
    }
    GaussianHmm::left_right(emissions)
}

struct Expectations {
    loglik: f64,
    initial: Vec<f64>,
    transitions: Vec<f64>,
    /// Per-sequence posteriors `γ_t(j)`, `T×N`.
    gammas: Vec<Vec<f64>>,
}

fn expectations(model: &GaussianHmm, training: &[Sequence]) -> Expectations {
    let n = model.n_states();
    let preds = predecessors(model);
    let mut out = Expectations {
        loglik: 0.0,
        initial: vec![0.0; n],
        transitions: vec![0.0; n * n],
        gammas: Vec::with_capacity(training.len()),
    };
    for seq in training {
        let len = seq.len();
        let logb = emission_log_probs(model, seq);
        let alpha = forward_table(model, &logb, &preds, len);
        let beta = backward_table(model, &logb, len);
        let ll = log_sum_exp(alpha[(len - 1) * n..].iter().copied());
        out.loglik += ll;

        let gamma: Vec<f64> = alpha
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a + b - ll).exp())
            .collect();
        for j in 0..n {
            out.initial[j] += gamma[j];
        }
        for t in 0..len.saturating_sub(1) {
            for j in 0..n {
                let tail = logb[(t + 1) * n + j] + beta[(t + 1) * n + j] - ll;
                for &(i, la) in &preds[j] {
                    out.transitions[i * n + j] += (alpha[t * n + i] + la + tail).exp();
                }
            }
        }
        out.gammas.push(gamma);
    }
    out
}

fn maximize(
    model: &GaussianHmm,
    training: &[Sequence],
    ex: &Expectations,
    cfg: &TrainConfig,
) -> Result<GaussianHmm, HmmError> {
    let n = model.n_states();
    let dim = model.dim();

    let mut transitions = model.transitions().to_vec();
    for i in 0..n {
        let row = &ex.transitions[i * n..(i + 1) * n];
        let total: f64 = row.iter().sum();
        if total > 0.0 && total.is_finite() {
            for j in 0..n {
                transitions[i * n + j] = row[j] / total;
            }
        }
    }

    let initial = match model.topology() {
        Topology::LeftRight => model.initial().to_vec(),
        Topology::Ergodic => {
            let total: f64 = ex.initial.iter().sum();
            ex.initial.iter().map(|v| v / total).collect()
        }
    };

    let mut emissions = Vec::with_capacity(n);
    for j in 0..n {
        let points = training.iter().zip(&ex.gammas).flat_map(move |(seq, gamma)| {
            seq.iter()
                .enumerate()
                .map(move |(t, o)| (o, gamma[t * n + j]))
        });
        let g = match Gaussian::fit_weighted(points, dim, cfg.variance_floor, cfg.covariance) {
            Some(g) => g?,
            // Unvisited state: its parameters do not enter the objective.
            None => model.emissions()[j].clone(),
        };
        emissions.push(g);
    }
    GaussianHmm::new(model.topology(), initial, transitions, emissions)
}

/// Total log-likelihood of a set of sequences.
pub fn total_loglik(model: &GaussianHmm, training: &[Sequence]) -> Result<f64, HmmError> {
    training
        .iter()
        .map(|s| super::infer::forward_loglik(model, s))
        .sum()
}

/// Re-estimates `model` by expectation maximisation.
///
/// Returns the trained model and the log-likelihood trace: the starting
/// value followed by one entry per accepted update. Training stops when an
/// update would change the log-likelihood by less than `tolerance` per
/// observation (the update is then discarded) or after `max_iterations`
/// updates.
pub fn baum_welch(
    model: &GaussianHmm,
    training: &[Sequence],
    cfg: &TrainConfig,
) -> Result<(GaussianHmm, Vec<f64>), HmmError> {
    if !(cfg.tolerance > 0.0) {
        return Err(HmmError::InvalidConfig(format!("tolerance must be > 0 (got {})", cfg.tolerance)));
    }
    if training.is_empty() {
        return Err(HmmError::NotEnoughSequences { got: 0, need: 1 });
    }
    for s in training {
        model.check_sequence(s)?;
    }
    let n_obs: usize = training.iter().map(Sequence::len).sum();

    let mut current = model.clone();
    let mut ex = expectations(&current, training);
    let mut trace = vec![ex.loglik];
    for _ in 0..cfg.max_iterations {
        let candidate = maximize(&current, training, &ex, cfg)?;
        let next = expectations(&candidate, training);
        let change = next.loglik - ex.loglik;
        if !next.loglik.is_finite() {
            return Err(HmmError::NumericalFailure(format!(
                "log-likelihood became {} during training",
                next.loglik
            )));
        }
        if change.abs() < cfg.tolerance * n_obs as f64 {
            break;
        }
        current = candidate;
        ex = next;
        trace.push(ex.loglik);
    }
    Ok((current, trace))
}

/// Segmental initialisation followed by Baum-Welch.
pub fn train_left_right(training: &[Sequence], cfg: &TrainConfig) -> Result<GaussianHmm, HmmError> {
    let init = init_left_right(training, cfg)?;
    let (model, _) = baum_welch(&init, training, cfg)?;
    Ok(model)
}
