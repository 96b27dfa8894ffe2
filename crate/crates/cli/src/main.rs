use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use enn::analysis::{DEFAULT_CURVE_POINTS, DEFAULT_RESOLUTION};
use enn::gradcheck::TOLERANCE;
use enn::io::SavedModel;
use enn::Problem;
use enn_cli::commands::{self, ExportKind, ExportOptions, Suite};
use enn_cli::run::{run_cell, write_failure, write_outputs, Metric};
use enn_cli::{ExperimentConfig, ModelKind, Scale};

#[derive(Parser)]
#[command(
    name = "enn",
    version,
    about = "Train and inspect expressive neural networks"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML experiment config; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: config `out`, else ./out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed; per-purpose seeds not pinned in the config derive from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Dataset sizes: desk = 100k/20k, full = 800k/50k.
    #[arg(long, global = true, value_enum)]
    scale: Option<Scale>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and write model.json, train_report.csv and metrics.json.
    Train {
        #[arg(long)]
        problem: Option<String>,
        #[arg(long, value_enum)]
        model: Option<ModelKind>,
        /// Record wall-clock time in metrics.json (breaks byte-identical reruns).
        #[arg(long)]
        timing: bool,
    },
    /// Run a problem x model sweep and write table.csv.
    Table {
        #[arg(long, value_enum, default_value = "classification")]
        suite: Suite,
    },
    /// Write analysis artifacts for a saved model.
    Export {
        #[arg(value_enum)]
        what: ExportKind,
        /// Model JSON written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        /// Redundancy threshold: pairs with correlation >= 1 - tol are reported.
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_CURVE_POINTS)]
        points: usize,
        #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
        z_min: f64,
        #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
        z_max: f64,
        /// Dataset CSV (x1,x2,y) for the activation operating ranges.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Compare closed-form LMS updates with finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Reverse every update (mutation check; must fail).
        #[arg(long, hide = true)]
        flip_sign: bool,
    },
    /// Write a synthetic dataset and its manifest.
    Dataset {
        #[arg(long)]
        problem: Option<String>,
        /// Sample count [default: the scale's training size].
        #[arg(long)]
        size: Option<usize>,
    },
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seeds.base = Some(s);
    }
    if let Some(s) = g.scale {
        cfg.scale = s;
    }
    Ok(cfg)
}

fn out_dir(g: &Global, cfg: &ExperimentConfig) -> PathBuf {
    g.out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn train(
    mut cfg: ExperimentConfig,
    out: &Path,
    problem: Option<String>,
    model: Option<ModelKind>,
    timing: bool,
) -> Result<bool> {
    if let Some(p) = problem {
        cfg.problem = p;
    }
    if let Some(m) = model {
        cfg.model = m;
    }
    cfg.validate()?;
    match run_cell(&cfg) {
        Ok(result) => {
            write_outputs(out, &cfg, &result, timing)?;
            let metric = match result.metric {
                Metric::Accuracy(a) => format!("accuracy {a}"),
                Metric::Mse(m) => format!("mse {m:e}"),
            };
            println!("{} {}: {metric}", cfg.problem()?.name(), cfg.model.name());
            Ok(true)
        }
        Err(failure) => {
            write_failure(out, &failure)?;
            eprintln!("error: {failure}");
            if failure.snapshot.is_some() {
                eprintln!(
                    "last finite model written to {}",
                    out.join("model.diverged.json").display()
                );
            }
            Ok(false)
        }
    }
}

fn table(cfg: ExperimentConfig, out: &Path, suite: Suite) -> Result<bool> {
    cfg.validate()?;
    let cells = commands::table_cells(&cfg, suite)?;
    let rows = commands::run_table(&cfg, &cells);
    std::fs::create_dir_all(out)?;
    let path = out.join("table.csv");
    commands::write_table(&path, &rows)?;
    let mut ok = true;
    for r in &rows {
        match &r.outcome {
            Ok(m) => println!(
                "{:<20} {:<5} {}",
                r.problem.name(),
                r.model.name(),
                m.value()
            ),
            Err(e) => {
                ok = false;
                eprintln!("{:<20} {:<5} error: {e}", r.problem.name(), r.model.name());
            }
        }
    }
    println!("wrote {}", path.display());
    Ok(ok)
}

fn gradcheck(cfg: &ExperimentConfig, trials: usize, flip_sign: bool) -> Result<bool> {
    let seed = cfg.seeds().base;
    let reports = commands::gradcheck(seed, trials, flip_sign)?;
    let mut ok = true;
    for (name, r) in &reports {
        println!(
            "{name:<22} trials {:>5}  coords {:>7}  max relative deviation {:.3e}",
            r.trials, r.checked, r.max_deviation
        );
        if !r.passed() {
            ok = false;
            if let Some(w) = &r.worst {
                eprintln!(
                    "  FAIL {name}: trial {} {:?}: closed form {:e}, finite difference {:e}",
                    w.trial, w.coord, w.closed_form, w.finite_difference
                );
            }
        }
    }
    println!(
        "tolerance {TOLERANCE:e}: {}",
        if ok { "ok" } else { "FAILED" }
    );
    Ok(ok)
}

fn dispatch(cli: Cli) -> Result<bool> {
    let cfg = load_config(&cli.global)?;
    let out = out_dir(&cli.global, &cfg);
    match cli.command {
        Command::Train {
            problem,
            model,
            timing,
        } => train(cfg, &out, problem, model, timing),
        Command::Table { suite } => table(cfg, &out, suite),
        Command::Export {
            what,
            model,
            resolution,
            tol,
            points,
            z_min,
            z_max,
            data,
        } => {
            let saved =
                SavedModel::load(&model).with_context(|| format!("loading {}", model.display()))?;
            let opts = ExportOptions {
                resolution,
                tol,
                range: (z_min, z_max),
                points,
                data,
            };
            for f in commands::export(&saved, what, &opts, &out)? {
                println!("{}", out.join(f).display());
            }
            Ok(true)
        }
        Command::Gradcheck { trials, flip_sign } => gradcheck(&cfg, trials, flip_sign),
        Command::Dataset { problem, size } => {
            let problem: Problem = problem.as_deref().unwrap_or(&cfg.problem).parse()?;
            let n = size.unwrap_or_else(|| cfg.train_size());
            commands::write_dataset_files(problem, n, cfg.seeds().train, &out)?;
            println!("wrote {}", out.join("dataset.csv").display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
