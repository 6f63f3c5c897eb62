//! Helpers shared by the integration tests: random small HMMs and brute-force
//! path enumeration.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tactile_core::hmm::{Gaussian, GaussianHmm, Sequence, Topology};

pub fn random_stochastic(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn random_gaussian(rng: &mut impl Rng, dim: usize) -> Gaussian {
    let mean: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let cov = if dim == 1 {
        vec![rng.random_range(0.2..2.0)]
    } else {
        let (a, b): (f64, f64) = (rng.random_range(0.3..2.0), rng.random_range(0.3..2.0));
        let c = rng.random_range(-0.5..0.5) * (a * b).sqrt();
        vec![a, c, c, b]
    };
    Gaussian::new(mean, cov).unwrap()
}

/// A random ergodic or left-right model with `n` states.
pub fn random_hmm(rng: &mut impl Rng, n: usize, dim: usize, left_right: bool) -> GaussianHmm {
    let emissions = (0..n).map(|_| random_gaussian(rng, dim)).collect();
    if left_right {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            if i + 1 < n {
                let stay = rng.random_range(0.1..0.9);
                a[i * n + i] = stay;
                a[i * n + i + 1] = 1.0 - stay;
            } else {
                a[i * n + i] = 1.0;
            }
        }
        let mut pi = vec![0.0; n];
        pi[0] = 1.0;
        GaussianHmm::new(Topology::LeftRight, pi, a, emissions).unwrap()
    } else {
        let pi = random_stochastic(rng, n);
        let a = (0..n).flat_map(|_| random_stochastic(rng, n)).collect();
        GaussianHmm::new(Topology::Ergodic, pi, a, emissions).unwrap()
    }
}

pub fn random_sequence(rng: &mut impl Rng, len: usize, dim: usize) -> Sequence {
    Sequence::new(dim, (0..len * dim).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap()
}

/// Joint log-probability `ln P(q, O)` of every state path, in lexicographic
/// path order.
pub fn path_log_probs(model: &GaussianHmm, seq: &Sequence) -> Vec<(Vec<usize>, f64)> {
    let n = model.n_states();
    let t = seq.len();
    let mut out = Vec::new();
    let mut path = vec![0usize; t];
    loop {
        let mut lp = model.initial()[path[0]].ln() + model.emissions()[path[0]].log_density(seq.obs(0));
        for k in 1..t {
            lp += model.transition(path[k - 1], path[k]).ln() + model.emissions()[path[k]].log_density(seq.obs(k));
        }
        out.push((path.clone(), lp));
        // Odometer increment, last position fastest.
        let mut k = t;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            path[k] += 1;
            if path[k] < n {
                break;
            }
            path[k] = 0;
        }
    }
}

pub fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Largest discrepancy (log units) between the recursions and enumeration
/// over `instances` random models with N ≤ 3, T ≤ 6, D ∈ {1, 2}.
pub fn enumeration_discrepancy(seed: u64, instances: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let n = rng.random_range(1..=3);
        let t = rng.random_range(1..=6);
        let dim = rng.random_range(1..=2);
        let model = random_hmm(&mut rng, n, dim, i % 3 == 0);
        let seq = random_sequence(&mut rng, t, dim);
        let paths = path_log_probs(&model, &seq);
        let total = log_sum_exp(paths.iter().map(|p| p.1));
        let best = paths.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let fwd = tactile_core::hmm::forward_loglik(&model, &seq).unwrap();
        let (vpath, vlp) = tactile_core::hmm::viterbi(&model, &seq).unwrap();
        let path_lp = paths.iter().find(|p| p.0 == vpath).map(|p| p.1).unwrap();
        worst = worst
            .max((fwd - total).abs())
            .max((vlp - best).abs())
            .max((path_lp - best).abs());
    }
    worst
}

/// Baum-Welch log-likelihood traces on synthetic left-right data; returns
/// the largest decrease between consecutive iterations.
pub fn worst_em_decrease(seed: u64) -> f64 {
    use tactile_core::hmm::{baum_welch, init_left_right, TrainConfig};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(1..=2);
    let n = rng.random_range(2..=5);
    let generator = random_hmm(&mut rng, n, dim, true);
    let count = rng.random_range(3..=6);
    let mut seqs = Vec::with_capacity(count);
    for _ in 0..count {
        let len = rng.random_range(20..=40);
        seqs.push(sample(&generator, &mut rng, len));
    }
    let cfg = TrainConfig {
        n_states: rng.random_range(2..=6),
        max_iterations: 30,
        tolerance: 1e-12,
        ..TrainConfig::default()
    };
    let init = init_left_right(&seqs, &cfg).unwrap();
    let (_, trace) = baum_welch(&init, &seqs, &cfg).unwrap();
    trace.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max)
}

/// Draws one sequence of length `len` from `model`.
pub fn sample(model: &GaussianHmm, rng: &mut impl Rng, len: usize) -> Sequence {
    use rand_distr::{Distribution, StandardNormal};
    let n = model.n_states();
    let dim = model.dim();
    let pick = |rng: &mut dyn rand::RngCore, probs: &[f64]| {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.len() - 1
    };
    let mut state = pick(rng, model.initial());
    let mut data = Vec::with_capacity(len * dim);
    for _ in 0..len {
        let g = &model.emissions()[state];
        let z: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        // Cholesky of a 1×1 or 2×2 covariance.
        let c = g.cov();
        if dim == 1 {
            data.push(g.mean()[0] + c[0].sqrt() * z[0]);
        } else {
            let l00 = c[0].sqrt();
            let l10 = c[2] / l00;
            let l11 = (c[3] - l10 * l10).sqrt();
            data.push(g.mean()[0] + l00 * z[0]);
            data.push(g.mean()[1] + l10 * z[0] + l11 * z[1]);
        }
        state = pick(rng, &model.transitions()[state * n..(state + 1) * n]);
    }
    Sequence::new(dim, data).unwrap()
}
