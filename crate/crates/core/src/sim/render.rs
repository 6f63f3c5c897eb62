//! Turns a simulated contact-force history into taxel frames.
//!
//! The rendering is deliberately simple: the contact force is spread as a
//! uniform pressure over a disc around a fixed centre, and each taxel reads
//! the force on the part of its cell the disc covers. The disc's area grows
//! with the force as `area_gain · F^area_exponent` taxels; compliant objects
//! wrap around the arm and use a larger gain, and an exponent below one
//! makes the per-taxel force grow with load. Each loaded taxel then gets
//! independent Gaussian noise, clamped at zero.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::model::SimTrajectory;
use super::SimError;
use crate::category::{Category, Condition};
use crate::taxel::{TaxelFrame, TaxelTrial, DEFAULT_COLS, DEFAULT_PITCH, DEFAULT_ROWS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderParams {
    pub rows: usize,
    pub cols: usize,
    pub pitch: f64,
    /// Patch centre in (row, col) grid coordinates; may sit between taxels.
    pub contact_center: (f64, f64),
    /// Patch area at 1 N of contact force, in taxels.
    pub area_gain: f64,
    /// Growth exponent of patch area with force; 1 is proportional.
    pub area_exponent: f64,
    /// Largest patch radius, in taxels.
    pub max_radius: f64,
    /// Per-taxel force noise (N).
    pub noise_std: f64,
    /// Noise on the recorded arm position (m).
    pub position_noise_std: f64,
    pub contact_threshold: f64,
    pub seed: u64,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            rows: DEFAULT_ROWS,
            cols: DEFAULT_COLS,
            pitch: DEFAULT_PITCH,
            contact_center: (11.5, 7.5),
            area_gain: 0.5,
            area_exponent: 1.0,
            max_radius: 6.0,
            noise_std: 0.0,
            position_noise_std: 0.0,
            contact_threshold: 0.5,
            seed: 0,
        }
    }
}

impl RenderParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidRender(m));
        if self.rows == 0 || self.cols == 0 {
            return bad("grid must be non-empty".into());
        }
        if !(self.area_gain >= 0.0 && self.area_gain.is_finite()) {
            return bad(format!("area_gain must be >= 0 (got {})", self.area_gain));
        }
        if !(self.area_exponent > 0.0 && self.area_exponent.is_finite()) {
            return bad(format!("area_exponent must be > 0 (got {})", self.area_exponent));
        }
        if !(self.noise_std >= 0.0 && self.position_noise_std >= 0.0) {
            return bad("noise must be >= 0".into());
        }
        if !(self.max_radius >= 0.0) {
            return bad(format!("max_radius must be >= 0 (got {})", self.max_radius));
        }
        let (r, c) = self.contact_center;
        let inside = |centre: f64, n: usize| {
            centre - self.max_radius >= 0.0 && centre + self.max_radius <= (n - 1) as f64
        };
        if !(inside(r, self.rows) && inside(c, self.cols)) {
            return bad(format!(
                "patch of radius {} around ({r}, {c}) leaves the {}x{} grid",
                self.max_radius, self.rows, self.cols
            ));
        }
        Ok(())
    }

    /// Radius (taxels) of the footprint under contact force `f`.
    pub fn radius(&self, f: f64) -> f64 {
        if !(f > 0.0) {
            return 0.0;
        }
        (self.area_gain * f.powf(self.area_exponent) / std::f64::consts::PI)
            .sqrt()
            .min(self.max_radius)
    }

    /// Taxels under contact force `f` with their share of it, in row-major
    /// order. Shares are proportional to the part of each taxel's cell the
    /// footprint covers (uniform pressure) and sum to one.
    pub fn patch(&self, f: f64) -> Vec<((usize, usize), f64)> {
        if !(f > 0.0) {
            return Vec::new();
        }
        let radius = self.radius(f);
        let (cr, cc) = self.contact_center;
        let span = |centre: f64, n: usize| {
            let lo = (centre - radius - 0.5).floor().max(0.0) as usize;
            let hi = ((centre + radius + 0.5).ceil() as usize).min(n - 1);
            lo..=hi
        };
        let mut cover = Vec::new();
        for r in span(cr, self.rows) {
            for c in span(cc, self.cols) {
                let mut hits = 0u32;
                for i in 0..SUBSAMPLES {
                    let y = r as f64 - 0.5 + (i as f64 + 0.5) / SUBSAMPLES as f64;
                    for j in 0..SUBSAMPLES {
                        let x = c as f64 - 0.5 + (j as f64 + 0.5) / SUBSAMPLES as f64;
                        if (y - cr).powi(2) + (x - cc).powi(2) <= radius * radius {
                            hits += 1;
                        }
                    }
                }
                if hits > 0 {
                    cover.push(((r, c), hits as f64));
                }
            }
        }
        if cover.is_empty() {
            // Footprint smaller than the sampling: load the cell(s) holding
            // the centre.
            let holds = |p: usize, centre: f64| (p as f64 - centre).abs() <= 0.5;
            for r in span(cr, self.rows) {
                for c in span(cc, self.cols) {
                    if holds(r, cr) && holds(c, cc) {
                        cover.push(((r, c), 1.0));
                    }
                }
            }
        }
        let total: f64 = cover.iter().map(|p| p.1).sum();
        cover.iter_mut().for_each(|p| p.1 /= total);
        cover
    }
}

const SUBSAMPLES: usize = 8;

/// A rendered trial and the arm position at each of its frames.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedTrial {
    pub trial: TaxelTrial,
    pub arm_position: Vec<f64>,
}

/// Samples `traj` at `sample_rate` and renders each sample as a taxel frame.
pub fn render_taxels(
    traj: &SimTrajectory,
    rp: &RenderParams,
    sample_rate: f64,
    label: Option<Category>,
    condition: Option<Condition>,
) -> Result<RenderedTrial, SimError> {
    rp.validate()?;
    if !(sample_rate > 0.0) || sample_rate * traj.dt > 1.0 + 1e-9 {
        return Err(SimError::InvalidRender(format!(
            "sample rate {sample_rate} Hz exceeds the simulation rate"
        )));
    }
    if traj.is_empty() {
        return Err(SimError::InvalidRender("empty trajectory".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rp.seed);
    let force_noise = Normal::new(0.0, rp.noise_std).map_err(|e| SimError::InvalidRender(e.to_string()))?;
    let pos_noise =
        Normal::new(0.0, rp.position_noise_std).map_err(|e| SimError::InvalidRender(e.to_string()))?;

    let samples = (traj.duration() * sample_rate + 1e-9).floor() as usize + 1;
    let mut frames = Vec::with_capacity(samples);
    let mut arm = Vec::with_capacity(samples);
    for k in 0..samples {
        let idx = ((k as f64 / sample_rate / traj.dt).round() as usize).min(traj.len() - 1);
        let f = traj.f_surf[idx];
        let mut forces = vec![0.0; rp.rows * rp.cols];
        for ((r, c), share) in rp.patch(f) {
            let noisy = f * share + if rp.noise_std > 0.0 { force_noise.sample(&mut rng) } else { 0.0 };
            forces[r * rp.cols + c] = noisy.max(0.0);
        }
        frames.push(TaxelFrame::new(rp.rows, rp.cols, rp.pitch, forces)?);
        let jitter = if rp.position_noise_std > 0.0 { pos_noise.sample(&mut rng) } else { 0.0 };
        arm.push(traj.x_arm[idx] + jitter);
    }
    let trial = TaxelTrial::new(frames, sample_rate, rp.contact_threshold, label, condition)?;
    Ok(RenderedTrial {
        trial,
        arm_position: arm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_force(f: f64, seconds: f64) -> SimTrajectory {
        let dt = 1e-3;
        let n = (seconds / dt).round() as usize + 1;
        SimTrajectory {
            dt,
            t: (0..n).map(|k| k as f64 * dt).collect(),
            x_arm: (0..n).map(|k| k as f64 * 1e-5).collect(),
            x_obj: vec![1.0; n],
            v_arm: vec![0.0; n],
            v_obj: vec![0.0; n],
            f_act: vec![f; n],
            f_surf: vec![f; n],
            f_fr: vec![0.0; n],
            contact_onset_time: (f > 0.0).then_some(0.0),
        }
    }

    #[test]
    fn zero_force_renders_empty_frames() {
        let out = render_taxels(&constant_force(0.0, 0.5), &RenderParams::default(), 100.0, None, None).unwrap();
        assert_eq!(out.trial.len(), 51);
        assert!(out.trial.frames().iter().all(|f| f.forces().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn even_split_over_four_taxels() {
        // A footprint centred on a taxel corner splits equally four ways.
        let rp = RenderParams {
            area_gain: 0.01,
            ..RenderParams::default()
        };
        let out = render_taxels(&constant_force(4.0, 0.1), &rp, 100.0, None, None).unwrap();
        for frame in out.trial.frames() {
            let loaded: Vec<f64> = frame.forces().iter().copied().filter(|&v| v > 0.0).collect();
            assert_eq!(loaded, vec![1.0; 4]);
            assert_eq!(frame.total_force(), 4.0);
        }
    }

    #[test]
    fn patch_grows_with_force_and_gain() {
        let rp = RenderParams::default();
        let small = rp.patch(2.0).len();
        let large = rp.patch(20.0).len();
        for f in [0.01, 2.0, 20.0, 1e4] {
            let total: f64 = rp.patch(f).iter().map(|p| p.1).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert!(large > small);
        let soft = RenderParams { area_gain: 1.5, ..rp };
        assert!(soft.patch(20.0).len() > large);
        let sublinear = RenderParams { area_exponent: 0.5, ..rp };
        assert!(sublinear.patch(20.0).len() < large);
        let capped = RenderParams { max_radius: 1.0, ..soft };
        assert!(capped.patch(1e6).len() <= 16);
        assert!(rp.patch(0.0).is_empty());
    }

    #[test]
    fn arm_position_follows_samples() {
        let out = render_taxels(&constant_force(1.0, 0.2), &RenderParams::default(), 100.0, None, None).unwrap();
        assert_eq!(out.arm_position.len(), out.trial.len());
        assert!((out.arm_position[10] - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn rejects_patch_leaving_grid_and_fast_sampling() {
        let rp = RenderParams {
            contact_center: (1.0, 1.0),
            ..RenderParams::default()
        };
        assert!(rp.validate().is_err());
        assert!(render_taxels(&constant_force(1.0, 0.1), &RenderParams::default(), 5000.0, None, None).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let rp = RenderParams {
            noise_std: 0.2,
            seed: 7,
            ..RenderParams::default()
        };
        let a = render_taxels(&constant_force(3.0, 0.2), &rp, 100.0, None, None).unwrap();
        let b = render_taxels(&constant_force(3.0, 0.2), &rp, 100.0, None, None).unwrap();
        assert_eq!(a, b);
        assert!(a.trial.frames().iter().all(|f| f.forces().iter().all(|&v| v >= 0.0)));
    }
}
