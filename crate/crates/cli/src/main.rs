use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tactile_core::features::{extract_features, ExtractOptions, FeatureSeries};
use tactile_core::harness::{self, human_table, ExperimentConfig, ExperimentReport, REPORT_FILE};
use tactile_core::hmm::{classify, observations, DegeneratePolicy, FeatureSet, HmmBank, TrainConfig};
use tactile_core::sim::{generate_dataset, Dataset, DatasetSpec, GeneratorConfig};
use tactile_core::taxel::{Connectivity, Pooling, TaxelTrial, DEFAULT_PITCH};

#[derive(Parser)]
#[command(name = "tactile", version, about = "Classify incidental contacts from tactile forearm data")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Conditions {
    Nominal,
    Varied,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a labelled dataset and write it with its manifest.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "nominal")]
        conditions: Conditions,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Extract feature series for every trial of a dataset.
    Extract {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Block size or `full`.
        #[arg(long, default_value = "1")]
        pooling: String,
        #[arg(long)]
        eight_connected: bool,
    },
    /// Train one model per category and save the bank.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "force")]
        features: String,
        #[arg(long, default_value_t = 10)]
        states: usize,
    },
    /// Classify a trial file with a saved bank.
    Classify {
        #[arg(long)]
        models: PathBuf,
        #[arg(long, default_value = "force")]
        features: String,
        /// Trial file in the taxel trial format.
        trial: PathBuf,
        /// Arm-position sidecar; defaults to `<stem>.arm.csv` when present.
        #[arg(long)]
        arm: Option<PathBuf>,
    },
    /// Run an experiment described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the tables of a finished experiment.
    Report {
        /// Experiment output directory, or its report.json.
        path: PathBuf,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Generate {
            out,
            seed,
            conditions,
            trials,
        } => {
            let spec = match conditions {
                Conditions::Nominal => DatasetSpec::stereotyped(trials),
                Conditions::Varied => DatasetSpec::varied(trials),
            };
            let ds = generate_dataset(&spec, &GeneratorConfig::default(), seed)?;
            ds.write(&out)?;
            println!("wrote {} trials to {}", ds.len(), out.display());
        }
        Command::Extract {
            dataset,
            out,
            pooling,
            eight_connected,
        } => {
            let ds = Dataset::read(&dataset).with_context(|| format!("reading {}", dataset.display()))?;
            let pooling = Pooling::parse(&pooling).with_context(|| format!("invalid pooling `{pooling}`"))?;
            let opts = options(eight_connected);
            fs::create_dir_all(&out)?;
            for e in &ds.entries {
                let fs = extract_features(&e.trial.pooled(pooling)?, &opts, e.arm_position.as_deref())
                    .with_context(|| e.file.clone())?;
                let stem = e.file.strip_suffix(".csv").unwrap_or(&e.file);
                let mut w = BufWriter::new(File::create(out.join(format!("{stem}.features.csv")))?);
                fs.write_to(&mut w)?;
                w.flush()?;
            }
            println!("extracted {} feature series to {}", ds.len(), out.display());
        }
        Command::Train {
            dataset,
            out,
            features,
            states,
        } => {
            let set: FeatureSet = features.parse()?;
            let ds = Dataset::read(&dataset).with_context(|| format!("reading {}", dataset.display()))?;
            let opts = options(false);
            let samples = ds
                .entries
                .iter()
                .map(|e| {
                    let fs = extract_features(&e.trial, &opts, e.arm_position.as_deref())
                        .with_context(|| e.file.clone())?;
                    Ok((e.category, observations(&fs, set, DegeneratePolicy::Zero)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let bank = HmmBank::train(set, &samples, &TrainConfig::default().with_states(states))?;
            bank.save(&out)?;
            println!("trained {set} bank ({states} states) into {}", out.display());
        }
        Command::Classify {
            models,
            features,
            trial,
            arm,
        } => {
            let set: FeatureSet = features.parse()?;
            let bank = HmmBank::load(&models, set)?;
            let fs = trial_features(&trial, arm.as_deref())?;
            let (cat, scores) = classify(&bank, &fs)?;
            println!("{}", cat.code());
            for (c, s) in tactile_core::Category::ALL.iter().zip(scores) {
                println!("  {} {s:.4}", c.code());
            }
        }
        Command::Experiment { config, seed, out } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ExperimentConfig::parse(&text).with_context(|| config.display().to_string())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.output = o;
            }
            let report = harness::run(&cfg)?;
            print!("{}", human_table(&report));
            eprintln!("wall time {:.1} s", report.wall_time_s);
        }
        Command::Report { path } => {
            let file = if path.is_dir() { path.join(REPORT_FILE) } else { path };
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            print!("{}", human_table(&ExperimentReport::from_json(&text)?));
        }
    }
    Ok(())
}

fn options(eight_connected: bool) -> ExtractOptions {
    ExtractOptions {
        connectivity: if eight_connected {
            Connectivity::Eight
        } else {
            Connectivity::Four
        },
        ..ExtractOptions::default()
    }
}

fn trial_features(path: &Path, arm: Option<&Path>) -> Result<FeatureSeries> {
    let trial = TaxelTrial::read_from(BufReader::new(File::open(path)?), DEFAULT_PITCH)
        .with_context(|| format!("reading {}", path.display()))?;
    let sidecar = path.with_extension("arm.csv");
    let arm_path = arm.map(Path::to_path_buf).or_else(|| sidecar.exists().then_some(sidecar));
    let arm = match arm_path {
        Some(p) => {
            let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let values = text
                .trim()
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .with_context(|| format!("parsing {}", p.display()))?;
            Some(values)
        }
        None => None,
    };
    if let Some(a) = &arm {
        if a.len() != trial.len() {
            bail!("arm positions ({}) do not match trial frames ({})", a.len(), trial.len());
        }
    }
    Ok(extract_features(&trial, &ExtractOptions::default(), arm.as_deref())?)
}
