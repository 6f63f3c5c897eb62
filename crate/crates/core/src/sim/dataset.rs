//! Labelled synthetic datasets: every (category, condition, trial) cell is
//! simulated with jittered object parameters, rendered to taxels and
//! written next to a CSV manifest.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::{critical_damping, simulate, SimScenario, GRAVITY};
use super::render::{render_taxels, RenderParams};
use super::SimError;
use crate::category::{Category, Condition, Setting};
use crate::taxel::{TaxelTrial, DEFAULT_PITCH, DEFAULT_SAMPLE_RATE};

pub const MANIFEST_FILE: &str = "manifest.csv";
const MANIFEST_HEADER: &str = "file,label,velocity_setting,stiffness_setting,seed";

/// Joint-space settings mapped onto the arm's 0.35 m lever.
pub const LEVER_ARM: f64 = 0.35;

pub fn joint_velocity_to_linear(deg_per_s: f64) -> f64 {
    deg_per_s.to_radians() * LEVER_ARM
}

pub fn joint_stiffness_to_linear(nm_per_rad: f64) -> f64 {
    nm_per_rad / (LEVER_ARM * LEVER_ARM)
}

/// Nominal object parameters of one material, before jitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub k_obj: f64,
    pub m_obj: f64,
    pub mu_s: f64,
    pub mu_k: f64,
    /// Rendered patch area per newton (taxels/N).
    pub area_gain: f64,
}

/// Everything the generator needs besides the cell list and the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub rigid: MaterialParams,
    pub soft: MaterialParams,
    /// Mass added to a movable object (kg). Fixed objects never move.
    pub m_arm: f64,
    pub rest_length: f64,
    /// Free travel before the arm touches the object (m).
    pub gap: f64,
    /// How far past the first-touch position the goal lies (m).
    pub depth: f64,
    /// Relative uniform jitter on stiffness, mass and friction.
    pub jitter: f64,
    /// Relative uniform jitter on gap and depth.
    pub placement_jitter: f64,
    /// Uniform jitter of the patch centre (taxels).
    pub center_jitter: f64,
    pub low_velocity: f64,
    pub high_velocity: f64,
    pub nominal_velocity: f64,
    pub low_stiffness: f64,
    pub high_stiffness: f64,
    pub nominal_stiffness: f64,
    pub duration: f64,
    pub dt: f64,
    pub sample_rate: f64,
    /// Template for rendering; `area_gain` and `seed` are set per trial.
    pub render: RenderParams,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            rigid: MaterialParams {
                k_obj: 5000.0,
                m_obj: 0.1,
                mu_s: 0.4,
                mu_k: 0.2,
                area_gain: 0.5,
            },
            soft: MaterialParams {
                k_obj: 50.0,
                m_obj: 0.08,
                mu_s: 0.5,
                mu_k: 0.3,
                area_gain: 1.5,
            },
            m_arm: 0.5,
            rest_length: 0.1,
            gap: 0.01,
            depth: 0.5,
            jitter: 0.2,
            placement_jitter: 0.2,
            center_jitter: 1.0,
            low_velocity: joint_velocity_to_linear(5.0),
            high_velocity: joint_velocity_to_linear(20.0),
            nominal_velocity: joint_velocity_to_linear(10.0),
            low_stiffness: joint_stiffness_to_linear(2.01),
            high_stiffness: joint_stiffness_to_linear(20.1),
            nominal_stiffness: 200.0,
            duration: 2.0,
            dt: 1e-4,
            sample_rate: DEFAULT_SAMPLE_RATE,
            render: RenderParams {
                area_exponent: 0.5,
                noise_std: 0.005,
                position_noise_std: 2e-4,
                contact_threshold: 0.05,
                ..RenderParams::default()
            },
        }
    }
}

impl GeneratorConfig {
    pub fn material(&self, category: Category) -> &MaterialParams {
        if category.is_soft() {
            &self.soft
        } else {
            &self.rigid
        }
    }

    /// Equilibrium ramp speed (m/s) and actuator stiffness (N/m).
    pub fn drive(&self, condition: Condition) -> (f64, f64) {
        let v = match condition.velocity {
            Setting::Low => self.low_velocity,
            Setting::High => self.high_velocity,
            Setting::Nominal => self.nominal_velocity,
        };
        let k = match condition.stiffness {
            Setting::Low => self.low_stiffness,
            Setting::High => self.high_stiffness,
            Setting::Nominal => self.nominal_stiffness,
        };
        (v, k)
    }

    /// Draws the jittered scenario and render parameters of one trial.
    pub fn draw(
        &self,
        category: Category,
        condition: Condition,
        rng: &mut impl Rng,
    ) -> (SimScenario, RenderParams) {
        let mut factor = |rel: f64| if rel > 0.0 { rng.random_range(1.0 - rel..=1.0 + rel) } else { 1.0 };
        let mat = *self.material(category);
        let k_obj = mat.k_obj * factor(self.jitter);
        let m_obj = mat.m_obj * factor(self.jitter);
        let fr = factor(self.jitter);
        let gap = self.gap * factor(self.placement_jitter);
        let depth = self.depth * factor(self.placement_jitter);
        let (eq_velocity, k_act) = self.drive(condition);
        let x0_obj = gap + self.rest_length;
        let sc = SimScenario {
            m_arm: self.m_arm,
            m_obj,
            k_act,
            k_obj,
            mu_s: mat.mu_s * fr,
            mu_k: mat.mu_k * fr,
            rest_length: self.rest_length,
            x0_arm: 0.0,
            x0_obj,
            x_eq_goal: gap + depth,
            eq_velocity,
            b_arm: critical_damping(k_act, self.m_arm),
            g: GRAVITY,
            fixed: category.is_fixed(),
            duration: self.duration,
            dt: self.dt,
        };
        let mut offset = || {
            if self.center_jitter > 0.0 {
                rng.random_range(-self.center_jitter..=self.center_jitter)
            } else {
                0.0
            }
        };
        let (r0, c0) = self.render.contact_center;
        let rp = RenderParams {
            contact_center: (r0 + offset(), c0 + offset()),
            area_gain: mat.area_gain,
            seed: rng.next_u64(),
            ..self.render
        };
        (sc, rp)
    }
}

/// Which cells to generate.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub categories: Vec<Category>,
    pub conditions: Vec<Condition>,
    pub trials_per_cell: usize,
}

impl DatasetSpec {
    /// All four categories at the nominal condition.
    pub fn stereotyped(trials_per_cell: usize) -> Self {
        Self {
            categories: Category::ALL.to_vec(),
            conditions: vec![Condition::NOMINAL],
            trials_per_cell,
        }
    }

    /// All four categories under the 2×2 velocity × stiffness grid.
    pub fn varied(trials_per_cell: usize) -> Self {
        Self {
            categories: Category::ALL.to_vec(),
            conditions: Condition::VARIED.to_vec(),
            trials_per_cell,
        }
    }

    pub fn len(&self) -> usize {
        self.categories.len() * self.conditions.len() * self.trials_per_cell
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    pub file: String,
    pub category: Category,
    pub condition: Condition,
    pub seed: u64,
    pub trial: TaxelTrial,
    pub arm_position: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub entries: Vec<DatasetEntry>,
}

/// Per-trial seed, a pure function of the master seed and the cell indices.
pub fn trial_seed(master: u64, category: usize, condition: usize, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((category as u64) << 48) | ((condition as u64) << 32) | trial as u64);
    rng.next_u64()
}

fn trial_file(category: Category, condition: Condition, trial: usize) -> String {
    format!(
        "{}_{}-{}_{trial:03}.csv",
        category.code(),
        condition.velocity.code(),
        condition.stiffness.code()
    )
}

fn arm_file(trial_file: &str) -> String {
    let stem = trial_file.strip_suffix(".csv").unwrap_or(trial_file);
    format!("{stem}.arm.csv")
}

/// Simulates and renders one trial from its seed.
pub fn generate_trial(
    cfg: &GeneratorConfig,
    category: Category,
    condition: Condition,
    seed: u64,
) -> Result<(TaxelTrial, Vec<f64>), SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sc, rp) = cfg.draw(category, condition, &mut rng);
    let traj = simulate(&sc)?;
    let out = render_taxels(&traj, &rp, cfg.sample_rate, Some(category), Some(condition))?;
    Ok((out.trial, out.arm_position))
}

/// Generates every cell of `spec`. Trials run in parallel; the result does
/// not depend on scheduling.
pub fn generate_dataset(spec: &DatasetSpec, cfg: &GeneratorConfig, seed: u64) -> Result<Dataset, SimError> {
    if spec.trials_per_cell == 0 {
        return Err(SimError::InvalidSpec("trials per cell must be >= 1".into()));
    }
    let mut cells = Vec::with_capacity(spec.len());
    for (ci, &cat) in spec.categories.iter().enumerate() {
        for (ki, &cond) in spec.conditions.iter().enumerate() {
            for t in 0..spec.trials_per_cell {
                cells.push((cat, cond, t, trial_seed(seed, ci, ki, t)));
            }
        }
    }
    let entries = cells
        .into_par_iter()
        .map(|(category, condition, t, seed)| {
            let (trial, arm) = generate_trial(cfg, category, condition, seed).map_err(|e| SimError::Cell {
                cell: format!("{category} {condition} #{t}"),
                source: Box::new(e),
            })?;
            Ok(DatasetEntry {
                file: trial_file(category, condition, t),
                category,
                condition,
                seed,
                trial,
                arm_position: Some(arm),
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(Dataset { entries })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes trial files, arm-position sidecars and the manifest.
    pub fn write(&self, dir: &Path) -> Result<(), SimError> {
        fs::create_dir_all(dir)?;
        let mut manifest = BufWriter::new(File::create(dir.join(MANIFEST_FILE))?);
        writeln!(manifest, "{MANIFEST_HEADER}")?;
        for e in &self.entries {
            let mut w = BufWriter::new(File::create(dir.join(&e.file))?);
            e.trial.write_to(&mut w)?;
            w.flush()?;
            if let Some(arm) = &e.arm_position {
                let mut w = BufWriter::new(File::create(dir.join(arm_file(&e.file)))?);
                let line: Vec<String> = arm.iter().map(|v| v.to_string()).collect();
                writeln!(w, "{}", line.join(","))?;
                w.flush()?;
            }
            writeln!(
                manifest,
                "{},{},{},{},{}",
                e.file,
                e.category.code(),
                e.condition.velocity.code(),
                e.condition.stiffness.code(),
                e.seed
            )?;
        }
        manifest.flush()?;
        Ok(())
    }

    /// Loads a dataset written by [`Dataset::write`]. Trials without an
    /// arm-position sidecar load with `arm_position = None`.
    pub fn read(dir: &Path) -> Result<Self, SimError> {
        let manifest = BufReader::new(File::open(dir.join(MANIFEST_FILE))?);
        let mut entries = Vec::new();
        for (i, line) in manifest.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| SimError::Manifest { line: lineno, message };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(bad(format!("expected 5 fields, found {}", fields.len())));
            }
            let category = Category::parse_label(fields[1])
                .map_err(|e| bad(e.to_string()))?
                .ok_or_else(|| bad("manifest entries must be labelled".into()))?;
            let velocity = Setting::parse_optional(fields[2]).map_err(|e| bad(e.to_string()))?;
            let stiffness = Setting::parse_optional(fields[3]).map_err(|e| bad(e.to_string()))?;
            let condition = match (velocity, stiffness) {
                (Some(v), Some(s)) => Condition::new(v, s),
                _ => return Err(bad("velocity and stiffness settings are required".into())),
            };
            let seed = fields[4].parse().map_err(|_| bad(format!("invalid seed `{}`", fields[4])))?;
            let file = fields[0].to_string();
            let trial = TaxelTrial::read_from(BufReader::new(File::open(dir.join(&file))?), DEFAULT_PITCH)?;
            let arm_path = dir.join(arm_file(&file));
            let arm_position = if arm_path.exists() {
                let text = fs::read_to_string(&arm_path)?;
                let values = text
                    .trim()
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| bad(format!("{}: {e}", arm_path.display())))?;
                Some(values)
            } else {
                None
            };
            entries.push(DatasetEntry {
                file,
                category,
                condition,
                seed,
                trial,
                arm_position,
            });
        }
        Ok(Self { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> GeneratorConfig {
        GeneratorConfig {
            duration: 0.6,
            dt: 5e-4,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn joint_settings_map_to_linear_values() {
        assert!((joint_velocity_to_linear(5.0) - 0.0305).abs() < 1e-4);
        assert!((joint_velocity_to_linear(20.0) - 0.122).abs() < 1e-3);
        assert!((joint_stiffness_to_linear(2.01) - 16.4).abs() < 0.01);
        assert!((joint_stiffness_to_linear(20.1) - 164.0).abs() < 0.1);
    }

    #[test]
    fn counts_match_spec() {
        let spec = DatasetSpec::varied(4);
        let ds = generate_dataset(&spec, &quick(), 1).unwrap();
        assert_eq!(ds.len(), 64);
        let dir = tempfile::tempdir().unwrap();
        ds.write(dir.path()).unwrap();
        let manifest = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(manifest.lines().count(), 65);
        let trials = fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| {
                let name = e.as_ref().unwrap().file_name().into_string().unwrap();
                name.ends_with(".csv") && !name.ends_with(".arm.csv") && name != MANIFEST_FILE
            })
            .count();
        assert_eq!(trials, 64);
    }

    #[test]
    fn same_seed_same_bytes() {
        let spec = DatasetSpec::stereotyped(2);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        generate_dataset(&spec, &quick(), 9).unwrap().write(a.path()).unwrap();
        generate_dataset(&spec, &quick(), 9).unwrap().write(b.path()).unwrap();
        for entry in fs::read_dir(a.path()).unwrap() {
            let name = entry.unwrap().file_name();
            assert_eq!(
                fs::read(a.path().join(&name)).unwrap(),
                fs::read(b.path().join(&name)).unwrap(),
                "{name:?}"
            );
        }
    }

    #[test]
    fn written_dataset_reads_back() {
        let ds = generate_dataset(&DatasetSpec::stereotyped(1), &quick(), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        ds.write(dir.path()).unwrap();
        assert_eq!(Dataset::read(dir.path()).unwrap(), ds);
    }

    #[test]
    fn seeds_differ_per_cell() {
        let s: Vec<u64> = (0..4).map(|t| trial_seed(5, 0, 0, t)).collect();
        assert!(s.windows(2).all(|w| w[0] != w[1]));
        assert_ne!(trial_seed(5, 1, 0, 0), trial_seed(5, 0, 1, 0));
        assert_ne!(trial_seed(5, 0, 0, 0), trial_seed(6, 0, 0, 0));
    }

    #[test]
    fn zero_trials_is_rejected() {
        assert!(generate_dataset(&DatasetSpec::stereotyped(0), &quick(), 0).is_err());
    }

    #[test]
    fn malformed_manifest_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(MANIFEST_FILE), format!("{MANIFEST_HEADER}\nx.csv,RF,low\n")).unwrap();
        assert!(matches!(Dataset::read(dir.path()), Err(SimError::Manifest { line: 2, .. })));
    }
}
