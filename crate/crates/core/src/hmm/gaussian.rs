use nalgebra::{DMatrix, SymmetricEigen};

use super::HmmError;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Shape of the per-state covariance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceKind {
    #[default]
    Full,
    Diagonal,
}

/// Multivariate normal density with a cached Cholesky factor.
#[derive(Debug, Clone)]
pub struct Gaussian {
    mean: Vec<f64>,
    cov: Vec<f64>,
    chol: Vec<f64>,
    log_norm: f64,
}

impl PartialEq for Gaussian {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.cov == other.cov
    }
}

impl Gaussian {
    /// `cov` is the row-major `D×D` covariance; it must be symmetric
    /// positive definite.
    pub fn new(mean: Vec<f64>, cov: Vec<f64>) -> Result<Self, HmmError> {
        let d = mean.len();
        if d == 0 || cov.len() != d * d {
            return Err(HmmError::DimensionMismatch {
                expected: d * d,
                actual: cov.len(),
            });
        }
        if mean.iter().chain(&cov).any(|v| !v.is_finite()) {
            return Err(HmmError::InvalidModel("non-finite emission parameter".into()));
        }
        for i in 0..d {
            for j in 0..i {
                if cov[i * d + j] != cov[j * d + i] {
                    return Err(HmmError::NotPositiveDefinite);
                }
            }
        }
        let chol = cholesky(&cov, d).ok_or(HmmError::NotPositiveDefinite)?;
        let log_det: f64 = (0..d).map(|i| 2.0 * chol[i * d + i].ln()).sum();
        Ok(Self {
            log_norm: -0.5 * (d as f64 * LN_2PI + log_det),
            mean,
            cov,
            chol,
        })
    }

    pub fn univariate(mean: f64, variance: f64) -> Result<Self, HmmError> {
        Self::new(vec![mean], vec![variance])
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Row-major covariance.
    pub fn cov(&self) -> &[f64] {
        &self.cov
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.cov[i * self.dim() + i]
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        debug_assert_eq!(x.len(), d);
        // Forward substitution L y = x - mu; the quadratic form is |y|^2.
        let mut y = [0.0f64; 8];
        let mut heap;
        let y: &mut [f64] = if d <= 8 {
            &mut y[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let mut quad = 0.0;
        for i in 0..d {
            let mut s = x[i] - self.mean[i];
            for k in 0..i {
                s -= self.chol[i * d + k] * y[k];
            }
            y[i] = s / self.chol[i * d + i];
            quad += y[i] * y[i];
        }
        self.log_norm - 0.5 * quad
    }

    /// Weighted maximum-likelihood fit with every covariance eigenvalue held
    /// at or above `floor`. With a diagonal kind the off-diagonal terms are
    /// dropped before flooring.
    pub fn fit_weighted<'a>(
        points: impl Iterator<Item = (&'a [f64], f64)> + Clone,
        dim: usize,
        floor: f64,
        kind: CovarianceKind,
    ) -> Option<Result<Self, HmmError>> {
        let mut total = 0.0;
        let mut mean = vec![0.0; dim];
        for (x, w) in points.clone() {
            total += w;
            for (m, v) in mean.iter_mut().zip(x) {
                *m += w * v;
            }
        }
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        mean.iter_mut().for_each(|m| *m /= total);
        let mut cov = vec![0.0; dim * dim];
        for (x, w) in points {
            for i in 0..dim {
                let di = x[i] - mean[i];
                for j in 0..=i {
                    cov[i * dim + j] += w * di * (x[j] - mean[j]);
                }
            }
        }
        for i in 0..dim {
            for j in 0..=i {
                let v = cov[i * dim + j] / total;
                cov[i * dim + j] = v;
                cov[j * dim + i] = v;
            }
        }
        if kind == CovarianceKind::Diagonal {
            for i in 0..dim {
                for j in 0..dim {
                    if i != j {
                        cov[i * dim + j] = 0.0;
                    }
                }
            }
        }
        Some(Self::new(mean, floor_covariance(cov, dim, floor)))
    }
}

/// Projects a symmetric matrix onto `{Σ : λ_min(Σ) ≥ floor}` by clamping its
/// eigenvalues. For a Gaussian likelihood this is the constrained maximiser,
/// so a floored M-step still never lowers the EM objective.
pub fn floor_covariance(cov: Vec<f64>, dim: usize, floor: f64) -> Vec<f64> {
    if dim == 1 {
        return vec![cov[0].max(floor)];
    }
    let is_diag = (0..dim).all(|i| (0..dim).all(|j| i == j || cov[i * dim + j] == 0.0));
    if is_diag {
        let mut out = cov;
        for i in 0..dim {
            out[i * dim + i] = out[i * dim + i].max(floor);
        }
        return out;
    }
    let m = DMatrix::from_row_slice(dim, dim, &cov);
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.iter().all(|&l| l >= floor) {
        return cov;
    }
    let clamped = eig.eigenvalues.map(|l| l.max(floor));
    let v = &eig.eigenvectors;
    let rebuilt = v * DMatrix::from_diagonal(&clamped) * v.transpose();
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            // Symmetrise exactly so the Cholesky check sees a symmetric matrix.
            let s = 0.5 * (rebuilt[(i, j)] + rebuilt[(j, i)]);
            out[i * dim + j] = s;
            out[j * dim + i] = s;
        }
    }
    out
}

fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}
