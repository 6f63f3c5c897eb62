//! Comparison classifier: whole-window feature vectors, reduced with PCA and
//! labelled by their nearest training neighbours.

use nalgebra::DMatrix;

use crate::category::Category;
use crate::features::{scale_features, FeatureError, FeatureSeries};

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("no input vectors")]
    Empty,
    #[error("vector length {actual} does not match expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("need at least {needed} vectors, got {actual}")]
    TooFewVectors { needed: usize, actual: usize },
    #[error("k must be >= 1")]
    InvalidK,
    #[error("component count must be >= 1")]
    InvalidComponents,
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

/// Feature channels that can be concatenated into a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Force,
    Area,
    Motion,
}

impl Channel {
    fn values(self, f: &FeatureSeries) -> &[f64] {
        match self {
            Channel::Force => &f.f_max,
            Channel::Area => &f.area,
            Channel::Motion => &f.d,
        }
    }
}

/// Concatenates the selected channels, each exactly `window` samples long.
/// With `scaled`, each channel is z-scored on its own first; a constant
/// channel becomes zeros.
pub fn vectorize(
    features: &FeatureSeries,
    channels: &[Channel],
    window: usize,
    scaled: bool,
) -> Result<Vec<f64>, BaselineError> {
    let mut out = Vec::with_capacity(window * channels.len());
    for &ch in channels {
        let v = ch.values(features);
        if v.len() != window {
            return Err(BaselineError::LengthMismatch {
                expected: window,
                actual: v.len(),
            });
        }
        if scaled {
            match scale_features(v) {
                Ok(s) => out.extend(s.values),
                Err(FeatureError::DegenerateSeries { .. }) => out.extend(std::iter::repeat_n(0.0, window)),
                Err(e) => return Err(e.into()),
            }
        } else {
            out.extend_from_slice(v);
        }
    }
    Ok(out)
}

/// Principal directions of a training set, by descending variance.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// One unit-length row per component.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>, BaselineError> {
        if v.len() != self.dim() {
            return Err(BaselineError::LengthMismatch {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        Ok(self
            .components
            .iter()
            .map(|c| c.iter().zip(v).zip(&self.mean).map(|((c, x), m)| c * (x - m)).sum())
            .collect())
    }

    pub fn reconstruct(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &w) in self.components.iter().zip(z) {
            for (o, ci) in out.iter_mut().zip(c) {
                *o += w * ci;
            }
        }
        out
    }
}

/// Fits the top `q` principal components of `vectors`.
///
/// Each component is oriented so its largest-magnitude entry is positive.
/// If the data span fewer than `q` directions, `q` is reduced with a warning.
pub fn pca_fit(vectors: &[Vec<f64>], q: usize) -> Result<PcaModel, BaselineError> {
    if q == 0 {
        return Err(BaselineError::InvalidComponents);
    }
    let first = vectors.first().ok_or(BaselineError::Empty)?;
    let dim = first.len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(BaselineError::LengthMismatch {
            expected: dim,
            actual: bad.len(),
        });
    }
    let n = vectors.len();
    if n < q + 1 {
        return Err(BaselineError::TooFewVectors {
            needed: q + 1,
            actual: n,
        });
    }
    let q = q.min(dim);
    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centred = DMatrix::from_fn(n, dim, |i, j| vectors[i][j] - mean[j]);
    let svd = centred.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let s_max = order.first().map_or(0.0, |&i| svd.singular_values[i]);
    let tol = s_max * (n.max(dim) as f64) * f64::EPSILON;
    let rank = order.iter().filter(|&&i| svd.singular_values[i] > tol).count();
    let kept = if rank < q {
        log::warn!("data span only {rank} directions; reducing PCA from {q} to {} components", rank.max(1));
        rank.max(1)
    } else {
        q
    };

    let mut components = Vec::with_capacity(kept);
    let mut explained_variance = Vec::with_capacity(kept);
    for &i in order.iter().take(kept) {
        let mut c: Vec<f64> = v_t.row(i).iter().copied().collect();
        let lead = c.iter().copied().fold(0.0, |a: f64, x| if x.abs() > a.abs() { x } else { a });
        if lead < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(c);
        let s = svd.singular_values[i];
        explained_variance.push(s * s / (n - 1) as f64);
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Majority label among the `k` nearest training points (Euclidean).
///
/// Equidistant neighbours are ordered by category; vote ties go to the
/// smaller mean distance, then to the earlier category.
pub fn knn_classify(train: &[(Vec<f64>, Category)], probe: &[f64], k: usize) -> Result<Category, BaselineError> {
    if k == 0 {
        return Err(BaselineError::InvalidK);
    }
    if train.is_empty() {
        return Err(BaselineError::Empty);
    }
    let mut ranked: Vec<(f64, Category)> = Vec::with_capacity(train.len());
    for (v, label) in train {
        if v.len() != probe.len() {
            return Err(BaselineError::LengthMismatch {
                expected: probe.len(),
                actual: v.len(),
            });
        }
        ranked.push((distance(v, probe), *label));
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = [(0usize, 0.0f64); 4];
    for &(d, label) in ranked.iter().take(k) {
        votes[label.index()].0 += 1;
        votes[label.index()].1 += d;
    }
    let mut best: Option<(usize, f64, Category)> = None;
    for cat in Category::ALL {
        let (count, total) = votes[cat.index()];
        if count == 0 {
            continue;
        }
        let mean = total / count as f64;
        let better = match best {
            None => true,
            Some((bc, bm, _)) => count > bc || (count == bc && mean < bm),
        };
        if better {
            best = Some((count, mean, cat));
        }
    }
    Ok(best.expect("k >= 1 and train non-empty").2)
}

/// PCA projection followed by k-nearest-neighbour voting.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaKnn {
    pub pca: PcaModel,
    pub k: usize,
    train: Vec<(Vec<f64>, Category)>,
}

impl PcaKnn {
    pub fn fit(samples: &[(Vec<f64>, Category)], q: usize, k: usize) -> Result<Self, BaselineError> {
        if k == 0 {
            return Err(BaselineError::InvalidK);
        }
        let vectors: Vec<Vec<f64>> = samples.iter().map(|(v, _)| v.clone()).collect();
        let pca = pca_fit(&vectors, q)?;
        let train = samples
            .iter()
            .map(|(v, c)| Ok((pca.project(v)?, *c)))
            .collect::<Result<Vec<_>, BaselineError>>()?;
        Ok(Self { pca, k, train })
    }

    pub fn classify(&self, v: &[f64]) -> Result<Category, BaselineError> {
        knn_classify(&self.train, &self.pca.project(v)?, self.k)
    }
}
