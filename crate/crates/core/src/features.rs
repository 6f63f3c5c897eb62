//! Contact features over the post-onset window: maximum taxel force, contact
//! area and contact motion, plus the scaling and time-normalization helpers
//! used by the classifiers.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::category::Category;
use crate::taxel::{connected_components, largest_component, threshold_frame, Connectivity, TaxelTrial};

/// Post-onset observation window in seconds.
pub const DEFAULT_WINDOW_S: f64 = 1.2;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("trial has no frames")]
    EmptyTrial,
    #[error("no frame exceeds the contact threshold {threshold}")]
    NoContact { threshold: f64 },
    #[error("arm position series has {actual} samples, trial has {expected} frames")]
    ArmLengthMismatch { expected: usize, actual: usize },
    #[error("series is constant (std = {std}); it cannot be scaled")]
    DegenerateSeries { std: f64 },
    #[error("series has {len} samples, at least {min} required")]
    TooShort { len: usize, min: usize },
    #[error("window must be positive and cover at least one sample (got {0} s)")]
    InvalidWindow(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-timestep contact features, starting at the onset frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSeries {
    /// Seconds since onset.
    pub t: Vec<f64>,
    /// Maximum taxel force inside the largest contact region (N).
    pub f_max: Vec<f64>,
    /// Taxel count of the largest contact region.
    pub area: Vec<f64>,
    /// Distance travelled by the region centroid since onset (m).
    pub d: Vec<f64>,
    pub onset_index: usize,
    pub label: Option<Category>,
}

impl FeatureSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), FeatureError> {
        writeln!(w, "{},{}", self.len(), Category::label_code(self.label))?;
        for series in [&self.t, &self.f_max, &self.area, &self.d] {
            let mut line = String::new();
            for (i, v) in series.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                write!(line, "{v}").expect("writing to a String");
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Reads a cached feature file. The onset index is not stored and comes
    /// back as 0.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self, FeatureError> {
        let lines: Vec<String> = r.lines().collect::<Result<_, _>>()?;
        let perr = |line: usize, message: String| FeatureError::Parse { line, message };
        let header = lines.first().ok_or_else(|| perr(1, "missing header".into()))?;
        let (len, label) = header
            .trim()
            .split_once(',')
            .ok_or_else(|| perr(1, "header must be `length,label`".into()))?;
        let len: usize = len.parse().map_err(|e| perr(1, format!("length: {e}")))?;
        let label = Category::parse_label(label).map_err(|e| perr(1, e.to_string()))?;
        let mut channels = Vec::with_capacity(4);
        for i in 0..4 {
            let line = lines
                .get(i + 1)
                .ok_or_else(|| perr(i + 2, "missing feature line".into()))?;
            let values = if line.trim().is_empty() {
                Vec::new()
            } else {
                line.trim()
                    .split(',')
                    .map(str::parse::<f64>)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| perr(i + 2, e.to_string()))?
            };
            if values.len() != len {
                return Err(perr(i + 2, format!("expected {len} values, found {}", values.len())));
            }
            channels.push(values);
        }
        let d = channels.pop().unwrap();
        let area = channels.pop().unwrap();
        let f_max = channels.pop().unwrap();
        let t = channels.pop().unwrap();
        Ok(Self {
            t,
            f_max,
            area,
            d,
            onset_index: 0,
            label,
        })
    }
}

/// Index of the first frame whose peak taxel force exceeds the trial's
/// contact threshold.
pub fn detect_onset(trial: &TaxelTrial) -> Result<usize, FeatureError> {
    if trial.is_empty() {
        return Err(FeatureError::EmptyTrial);
    }
    let tau = trial.contact_threshold();
    trial
        .frames()
        .iter()
        .position(|f| f.max_force() > tau)
        .ok_or(FeatureError::NoContact { threshold: tau })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    pub window_s: f64,
    pub connectivity: Connectivity,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            window_s: DEFAULT_WINDOW_S,
            connectivity: Connectivity::Four,
        }
    }
}

impl ExtractOptions {
    pub fn window_samples(&self, sample_rate: f64) -> usize {
        (self.window_s * sample_rate).round() as usize
    }
}

/// Computes `(f_max, area, d)` for every frame in the window after onset.
///
/// `arm_position` is the arm translation (m) along the skin normal at each
/// frame. Frames without a contact region contribute zero force and area and
/// repeat the previous displacement. A trial that ends before the window is
/// full is padded with the per-channel mean of what was observed.
pub fn extract_features(
    trial: &TaxelTrial,
    opts: &ExtractOptions,
    arm_position: Option<&[f64]>,
) -> Result<FeatureSeries, FeatureError> {
    let rate = trial.sample_rate();
    let window = opts.window_samples(rate);
    if !(opts.window_s > 0.0) || window == 0 {
        return Err(FeatureError::InvalidWindow(opts.window_s));
    }
    if let Some(arm) = arm_position {
        if arm.len() != trial.len() {
            return Err(FeatureError::ArmLengthMismatch {
                expected: trial.len(),
                actual: arm.len(),
            });
        }
    }
    let onset = detect_onset(trial)?;
    let tau = trial.contact_threshold();
    let end = (onset + window).min(trial.len());

    let world = |k: usize, centroid: (f64, f64), pitch: f64| -> [f64; 3] {
        let arm = arm_position.map_or(0.0, |a| a[k]);
        [centroid.0 * pitch, centroid.1 * pitch, arm]
    };

    let mut f_max = Vec::with_capacity(window);
    let mut area = Vec::with_capacity(window);
    let mut d = Vec::with_capacity(window);
    let mut origin: Option<[f64; 3]> = None;
    let mut last_d = 0.0;

    for k in onset..end {
        let frame = &trial.frames()[k];
        let mask = threshold_frame(frame, tau);
        let components = connected_components(&mask, opts.connectivity);
        match largest_component(&components) {
            Some(c) => {
                let p = world(k, c.centroid, frame.pitch());
                let p0 = *origin.get_or_insert(p);
                let dist = p.iter().zip(&p0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                f_max.push(c.max_force(frame));
                area.push(c.area() as f64);
                d.push(dist);
                last_d = dist;
            }
            None => {
                f_max.push(0.0);
                area.push(0.0);
                d.push(last_d);
            }
        }
    }

    let observed = f_max.len();
    if observed < window {
        let fill = |v: &mut Vec<f64>, round: bool| {
            let m = mean(v);
            let m = if round { m.round() } else { m };
            v.resize(window, m);
        };
        fill(&mut f_max, false);
        fill(&mut area, true);
        fill(&mut d, false);
    }

    Ok(FeatureSeries {
        t: (0..window).map(|k| k as f64 / rate).collect(),
        f_max,
        area,
        d,
        onset_index: onset,
        label: trial.label,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// A z-scored channel together with the statistics used to produce it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledSeries {
    pub values: Vec<f64>,
    pub mean_used: f64,
    pub std_used: f64,
}

impl ScaledSeries {
    pub fn unscale(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v * self.std_used + self.mean_used)
            .collect()
    }
}

/// Z-scores a series with its own mean and population standard deviation.
pub fn scale_features(values: &[f64]) -> Result<ScaledSeries, FeatureError> {
    if values.is_empty() {
        return Err(FeatureError::TooShort { len: 0, min: 2 });
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64;
    let std = var.sqrt();
    // Relative cut-off so constants that picked up rounding noise still count.
    if !(std > 0.0) || std <= 1e-12 * m.abs() {
        return Err(FeatureError::DegenerateSeries { std });
    }
    Ok(ScaledSeries {
        values: values.iter().map(|v| (v - m) / std).collect(),
        mean_used: m,
        std_used: std,
    })
}

/// Linearly resamples `series` onto `target_len` evenly spaced points spanning
/// the same support. Both endpoints are reproduced exactly.
pub fn time_normalize(series: &[f64], target_len: usize) -> Result<Vec<f64>, FeatureError> {
    let n = series.len();
    if n < 2 {
        return Err(FeatureError::TooShort { len: n, min: 2 });
    }
    if target_len < 2 {
        return Err(FeatureError::TooShort { len: target_len, min: 2 });
    }
    if n == target_len {
        return Ok(series.to_vec());
    }
    let span = (n - 1) as f64;
    let steps = (target_len - 1) as f64;
    let mut out = Vec::with_capacity(target_len);
    for i in 0..target_len {
        if i == target_len - 1 {
            out.push(series[n - 1]);
            continue;
        }
        let x = i as f64 * span / steps;
        let lo = (x.floor() as usize).min(n - 2);
        let frac = x - lo as f64;
        out.push(series[lo] + frac * (series[lo + 1] - series[lo]));
    }
    Ok(out)
}
