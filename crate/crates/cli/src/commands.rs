//! The `table`, `export`, `gradcheck` and `dataset` verbs. `train` lives in
//! [`crate::run`].

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use enn::analysis::{
    activation_report, bump, decision_map, redundancy_report, response_surface, GridMap,
    DEFAULT_CURVE_POINTS, DEFAULT_CURVE_RANGE, DEFAULT_RESOLUTION,
};
use enn::gradcheck::{check_benchmark, check_enn_with, GradCheckReport};
use enn::io::{
    dataset_manifest, fmt_real, grid_to_pgm, read_dataset, write_coefficients, write_csv,
    write_curve, write_dataset, write_grid_csv, SavedModel,
};
use enn::training::Parameterized;
use enn::{
    generate_dataset, lms_step, Activation, BenchmarkKind, EnnModel, ForwardTrace, LmsConfig,
    PowerEstimates, Problem, Result as CoreResult, StepSizes, TaskKind,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ModelKind};
use crate::run::{run_cell, Metric};

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Classification,
    Regression,
}

/// One row of a results table.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub problem: Problem,
    pub model: ModelKind,
    /// `Err` holds the failure message.
    pub outcome: Result<Metric, String>,
}

/// The cells of a sweep: the configured lists, else every problem of `suite`
/// against every model.
pub fn table_cells(cfg: &ExperimentConfig, suite: Suite) -> Result<Vec<(Problem, ModelKind)>> {
    let problems: Vec<Problem> = match &cfg.table.problems {
        Some(names) => names.iter().map(|n| n.parse()).collect::<CoreResult<_>>()?,
        None => match suite {
            Suite::Classification => Problem::CLASSIFICATION.to_vec(),
            Suite::Regression => Problem::REGRESSION.to_vec(),
        },
    };
    let models = cfg
        .table
        .models
        .clone()
        .unwrap_or_else(|| ModelKind::ALL.to_vec());
    Ok(problems
        .iter()
        .flat_map(|&p| models.iter().map(move |&m| (p, m)))
        .collect())
}

/// Runs every cell, independent cells in parallel. Rows keep cell order.
pub fn run_table(cfg: &ExperimentConfig, cells: &[(Problem, ModelKind)]) -> Vec<TableRow> {
    cells
        .par_iter()
        .map(|&(problem, model)| {
            let cell = ExperimentConfig {
                problem: problem.name().to_string(),
                model,
                ..cfg.clone()
            };
            TableRow {
                problem,
                model,
                outcome: run_cell(&cell).map(|r| r.metric).map_err(|e| e.message),
            }
        })
        .collect()
}

/// `problem,model,metric`; failed cells read `error`.
pub fn write_table(path: &Path, rows: &[TableRow]) -> Result<()> {
    write_csv(
        create(path)?,
        &["problem", "model", "metric"],
        rows.iter().map(|r| {
            let metric = match &r.outcome {
                Ok(m) => m.value().to_string(),
                Err(_) => "error".to_string(),
            };
            [
                r.problem.name().to_string(),
                r.model.name().to_string(),
                metric,
            ]
        }),
    )?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportKind {
    Bumps,
    Map,
    Response,
    Activations,
    Redundancy,
}

#[derive(Debug, Clone)]
pub struct ExportOptions {
    pub resolution: usize,
    pub tol: f64,
    pub range: (f64, f64),
    pub points: usize,
    /// Dataset whose pre-activations set the reported operating ranges.
    pub data: Option<PathBuf>,
}

impl Default for ExportOptions {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            tol: 0.01,
            range: DEFAULT_CURVE_RANGE,
            points: DEFAULT_CURVE_POINTS,
            data: None,
        }
    }
}

fn write_grid(out: &Path, stem: &str, map: &GridMap) -> Result<()> {
    fs::write(out.join(format!("{stem}.pgm")), grid_to_pgm(map))?;
    write_grid_csv(create(&out.join(format!("{stem}.csv")))?, map)?;
    Ok(())
}

/// Writes the artifacts of `what` for `model` under `out`; returns the file names.
pub fn export(
    model: &SavedModel,
    what: ExportKind,
    opts: &ExportOptions,
    out: &Path,
) -> Result<Vec<String>> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let net = model.clone().into_network();
    let r = opts.resolution;
    let mut written = Vec::new();
    match what {
        ExportKind::Bumps => {
            for k in 0..net.m1() {
                let stem = format!("bump_{k}");
                write_grid(out, &stem, &bump(&net, k, r)?)?;
                written.extend([format!("{stem}.pgm"), format!("{stem}.csv")]);
            }
        }
        ExportKind::Map => {
            write_grid(out, "decision_map", &decision_map(&net, r)?)?;
            written.extend(["decision_map.pgm".into(), "decision_map.csv".into()]);
        }
        ExportKind::Response => {
            write_grid(out, "response", &response_surface(&net, r)?)?;
            written.extend(["response.pgm".into(), "response.csv".into()]);
        }
        ExportKind::Activations => {
            let data = match &opts.data {
                Some(p) => Some(read_dataset(
                    fs::File::open(p).with_context(|| format!("opening {}", p.display()))?,
                )?),
                None => None,
            };
            let curves = activation_report(&net, opts.range, opts.points, data.as_deref())?;
            let acts: Vec<&Activation> = net
                .hidden_activations()
                .iter()
                .chain(std::iter::once(net.output_activation()))
                .collect();
            for (c, act) in curves.iter().zip(acts) {
                let name = format!("activation_{}.csv", c.name);
                write_curve(create(&out.join(&name))?, c)?;
                written.push(name);
                if let Activation::Adaptive(a) = act {
                    let name = format!("coeffs_{}.csv", c.name);
                    write_coefficients(create(&out.join(&name))?, a.coeffs())?;
                    written.push(name);
                }
            }
            let fmt_opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
            write_csv(
                create(&out.join("operating_ranges.csv"))?,
                &["activation", "z_min", "z_max"],
                curves.iter().map(|c| {
                    [
                        c.name.clone(),
                        fmt_opt(c.operating_range.map(|r| r.0)),
                        fmt_opt(c.operating_range.map(|r| r.1)),
                    ]
                }),
            )?;
            written.push("operating_ranges.csv".into());
        }
        ExportKind::Redundancy => {
            let pairs = redundancy_report(&net, r, opts.tol)?;
            write_csv(
                create(&out.join("redundancy.csv"))?,
                &[
                    "first",
                    "second",
                    "correlation",
                    "weight_sign",
                    "cancelling",
                ],
                pairs.iter().map(|p| {
                    [
                        p.first.to_string(),
                        p.second.to_string(),
                        fmt_real(p.correlation),
                        p.weight_sign.to_string(),
                        p.cancelling.to_string(),
                    ]
                }),
            )?;
            written.push("redundancy.csv".into());
        }
    }
    Ok(written)
}

/// [`lms_step`] with every parameter delta reversed: a deliberately broken
/// update that the oracle must reject.
pub fn sign_flipped_step(
    model: &mut EnnModel,
    trace: &ForwardTrace,
    y: f64,
    config: &LmsConfig,
    powers: &mut PowerEstimates,
) -> CoreResult<StepSizes> {
    let before = model.clone();
    let steps = lms_step(model, trace, y, config, powers)?;
    for coord in before.coords() {
        let old = before.param(coord).expect("coordinate exists");
        let p = model.param_mut(coord).expect("coordinate exists");
        *p = 2.0 * old - *p;
    }
    Ok(steps)
}

/// Oracle reports for the ENN and every benchmark/task pairing.
pub fn gradcheck(
    seed: u64,
    trials: usize,
    flip_sign: bool,
) -> Result<Vec<(String, GradCheckReport)>> {
    if trials == 0 {
        bail!("trials must be >= 1");
    }
    let mut out = Vec::new();
    let report = if flip_sign {
        check_enn_with(seed, trials, &sign_flipped_step)?
    } else {
        check_enn_with(seed, trials, &lms_step)?
    };
    out.push(("enn".to_string(), report));
    for kind in BenchmarkKind::ALL {
        for (task, tag) in [
            (TaskKind::Classification, "classification"),
            (TaskKind::Regression, "regression"),
        ] {
            out.push((
                format!("{}/{tag}", kind.name()),
                check_benchmark(kind, task, seed, trials)?,
            ));
        }
    }
    Ok(out)
}

/// Writes `dataset.csv` and `manifest.json` under `out`.
pub fn write_dataset_files(problem: Problem, n: usize, seed: u64, out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let data = generate_dataset(problem, n, seed)?;
    write_dataset(create(&out.join("dataset.csv"))?, &data)?;
    fs::write(
        out.join("manifest.json"),
        dataset_manifest(problem, n, seed),
    )?;
    Ok(())
}
