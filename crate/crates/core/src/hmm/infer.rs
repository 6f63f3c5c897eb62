//! Log-space forward, backward and Viterbi recursions.
//!
//! Every quantity is kept as a natural logarithm, so long sequences with
//! very peaked emissions never underflow. Only transitions with nonzero
//! probability are visited, which keeps left-right models at `O(T·N)`.

use super::model::{GaussianHmm, Sequence};
use super::HmmError;

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Per-state incoming transitions `(i, ln a_ij)` with `a_ij > 0`.
pub(crate) fn predecessors(model: &GaussianHmm) -> Vec<Vec<(usize, f64)>> {
    let n = model.n_states();
    (0..n)
        .map(|j| {
            (0..n)
                .filter(|&i| model.transition(i, j) > 0.0)
                .map(|i| (i, model.transition(i, j).ln()))
                .collect()
        })
        .collect()
}

/// `ln b_j(o_t)` laid out `T×N`.
pub(crate) fn emission_log_probs(model: &GaussianHmm, seq: &Sequence) -> Vec<f64> {
    let n = model.n_states();
    let mut out = Vec::with_capacity(seq.len() * n);
    for o in seq.iter() {
        out.extend(model.emissions().iter().map(|g| g.log_density(o)));
    }
    out
}

/// Log forward variables `ln α_t(j)`, `T×N`.
pub(crate) fn forward_table(
    model: &GaussianHmm,
    logb: &[f64],
    preds: &[Vec<(usize, f64)>],
    len: usize,
) -> Vec<f64> {
    let n = model.n_states();
    let mut alpha = vec![f64::NEG_INFINITY; len * n];
    for j in 0..n {
        let pi = model.initial()[j];
        if pi > 0.0 {
            alpha[j] = pi.ln() + logb[j];
        }
    }
    for t in 1..len {
        let (prev, cur) = alpha.split_at_mut(t * n);
        let prev = &prev[(t - 1) * n..];
        for j in 0..n {
            let s = log_sum_exp(preds[j].iter().map(|&(i, la)| prev[i] + la));
            cur[j] = s + logb[t * n + j];
        }
    }
    alpha
}

/// Log backward variables `ln β_t(i)`, `T×N`.
pub(crate) fn backward_table(
    model: &GaussianHmm,
    logb: &[f64],
    len: usize,
) -> Vec<f64> {
    let n = model.n_states();
    let succ: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| model.transition(i, j) > 0.0)
                .map(|j| (j, model.transition(i, j).ln()))
                .collect()
        })
        .collect();
    let mut beta = vec![0.0; len * n];
    for t in (0..len.saturating_sub(1)).rev() {
        let (cur, next) = beta.split_at_mut((t + 1) * n);
        let cur = &mut cur[t * n..];
        for i in 0..n {
            cur[i] = log_sum_exp(
                succ[i]
                    .iter()
                    .map(|&(j, la)| la + logb[(t + 1) * n + j] + next[j]),
            );
        }
    }
    beta
}

/// Total log-likelihood `ln P(O | λ)`.
pub fn forward_loglik(model: &GaussianHmm, seq: &Sequence) -> Result<f64, HmmError> {
    model.check_sequence(seq)?;
    let n = model.n_states();
    let len = seq.len();
    let logb = emission_log_probs(model, seq);
    let alpha = forward_table(model, &logb, &predecessors(model), len);
    Ok(log_sum_exp(alpha[(len - 1) * n..].iter().copied()))
}

/// Most probable state path and its joint log-probability
/// `max_q ln P(q, O | λ)`. Ties go to the lower state index.
pub fn viterbi(model: &GaussianHmm, seq: &Sequence) -> Result<(Vec<usize>, f64), HmmError> {
    model.check_sequence(seq)?;
    let n = model.n_states();
    let len = seq.len();
    let logb = emission_log_probs(model, seq);
    let preds = predecessors(model);

    let mut delta = vec![f64::NEG_INFINITY; n];
    for j in 0..n {
        let pi = model.initial()[j];
        if pi > 0.0 {
            delta[j] = pi.ln() + logb[j];
        }
    }
    let mut back = vec![0usize; len * n];
    let mut next = vec![f64::NEG_INFINITY; n];
    for t in 1..len {
        for j in 0..n {
            let mut best = f64::NEG_INFINITY;
            let mut arg = preds[j].first().map_or(j, |p| p.0);
            for &(i, la) in &preds[j] {
                let v = delta[i] + la;
                if v > best {
                    best = v;
                    arg = i;
                }
            }
            next[j] = best + logb[t * n + j];
            back[t * n + j] = arg;
        }
        std::mem::swap(&mut delta, &mut next);
    }

    let (mut state, mut best) = (0, f64::NEG_INFINITY);
    for (j, &v) in delta.iter().enumerate() {
        if v > best {
            best = v;
            state = j;
        }
    }
    let mut path = vec![0; len];
    path[len - 1] = state;
    for t in (1..len).rev() {
        state = back[t * n + state];
        path[t - 1] = state;
    }
    Ok((path, best))
}
