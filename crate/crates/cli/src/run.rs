//! One (problem, model) experiment cell: data, initialization, training and
//! evaluation, plus the files a `train` run leaves behind.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use enn::io::{write_train_report, SavedModel};
use enn::{
    accuracy, generate_dataset, init_benchmark, init_model, mse, train, train_benchmark, Sample,
    TaskKind, TrainError, TrainReport,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, Seeds};

pub const METRICS_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Accuracy(f64),
    Mse(f64),
}

impl Metric {
    pub fn value(&self) -> f64 {
        match *self {
            Metric::Accuracy(v) | Metric::Mse(v) => v,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub model: SavedModel,
    pub report: TrainReport,
    pub metric: Metric,
    pub train_size: usize,
    pub test_size: usize,
    pub seeds: Seeds,
    pub wall_time: f64,
}

/// Why a cell produced no result. `snapshot` is the last finite model of a
/// diverged run.
#[derive(Debug)]
pub struct CellFailure {
    pub message: String,
    pub snapshot: Option<Box<(SavedModel, TrainReport)>>,
}

impl std::fmt::Display for CellFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CellFailure {}

impl From<anyhow::Error> for CellFailure {
    fn from(e: anyhow::Error) -> Self {
        Self {
            message: format!("{e:#}"),
            snapshot: None,
        }
    }
}

impl From<enn::EnnError> for CellFailure {
    fn from(e: enn::EnnError) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn diverged<M>(e: TrainError<M>, wrap: impl FnOnce(M) -> SavedModel) -> CellFailure {
    match e {
        TrainError::Invalid(e) => e.into(),
        TrainError::Diverged {
            iteration,
            cause,
            snapshot,
            report,
        } => CellFailure {
            message: format!("training diverged at iteration {iteration}: {cause}"),
            snapshot: Some(Box::new((wrap(*snapshot), report))),
        },
    }
}

fn evaluate(model: &SavedModel, task: TaskKind, test: &[Sample]) -> Result<Metric, CellFailure> {
    let net = model.clone().into_network();
    Ok(match task {
        TaskKind::Classification => Metric::Accuracy(accuracy(&net, test)?),
        TaskKind::Regression => Metric::Mse(mse(&net, test)?),
    })
}

/// Runs one cell sequentially. The configuration is validated first.
pub fn run_cell(cfg: &ExperimentConfig) -> Result<CellResult, CellFailure> {
    cfg.validate()?;
    let problem = cfg.problem()?;
    let basis = cfg.basis()?;
    let seeds = cfg.seeds();
    let (n_train, n_test) = (cfg.train_size(), cfg.test_size());
    let lms = enn::LmsConfig {
        shuffle_seed: seeds.shuffle,
        ..cfg.lms
    };

    let start = Instant::now();
    let train_data = generate_dataset(problem, n_train, seeds.train)?;
    let test_data = generate_dataset(problem, n_test, seeds.test)?;
    let (model, report) = match cfg.model.benchmark() {
        None => {
            let m = init_model(2, cfg.m1, basis, seeds.init)?;
            let (m, r) = train(m, &train_data, &lms).map_err(|e| diverged(e, SavedModel::Enn))?;
            (SavedModel::Enn(m), r)
        }
        Some(kind) => {
            let m = init_benchmark(kind, problem.kind(), 2, cfg.m1, basis, seeds.init)?;
            let (m, r) = train_benchmark(m, &train_data, &lms)
                .map_err(|e| diverged(e, SavedModel::Benchmark))?;
            (SavedModel::Benchmark(m), r)
        }
    };
    let metric = evaluate(&model, problem.kind(), &test_data)?;
    Ok(CellResult {
        model,
        report,
        metric,
        train_size: n_train,
        test_size: n_test,
        seeds,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Serialize)]
struct MetricsDoc<'a> {
    schema: u32,
    problem: &'a str,
    model: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mse: Option<f64>,
    train_size: usize,
    test_size: usize,
    epochs: usize,
    seed: u64,
    seeds: Seeds,
    final_train_mse: Option<f64>,
    /// `null` unless timing was requested, so reruns stay byte-identical.
    wall_time: Option<f64>,
}

/// The metrics document of a finished cell.
pub fn metrics_json(cfg: &ExperimentConfig, result: &CellResult, timing: bool) -> Result<String> {
    let problem = cfg.problem()?;
    let (accuracy, mse) = match result.metric {
        Metric::Accuracy(a) => (Some(a), None),
        Metric::Mse(m) => (None, Some(m)),
    };
    let doc = MetricsDoc {
        schema: METRICS_SCHEMA,
        problem: problem.name(),
        model: cfg.model.name(),
        accuracy,
        mse,
        train_size: result.train_size,
        test_size: result.test_size,
        epochs: cfg.lms.epochs,
        seed: result.seeds.base,
        seeds: result.seeds,
        final_train_mse: result.report.epoch_mse.last().copied(),
        wall_time: timing.then_some(result.wall_time),
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn write_report(path: &Path, report: &TrainReport) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_train_report(std::io::BufWriter::new(file), report)?;
    Ok(())
}

/// Writes `model.json`, `train_report.csv` and `metrics.json` under `out`.
pub fn write_outputs(
    out: &Path,
    cfg: &ExperimentConfig,
    result: &CellResult,
    timing: bool,
) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("model.json"), result.model.to_json())?;
    write_report(&out.join("train_report.csv"), &result.report)?;
    fs::write(out.join("metrics.json"), metrics_json(cfg, result, timing)?)?;
    Ok(())
}

/// Writes what a diverged run left: `model.diverged.json` and its partial report.
pub fn write_failure(out: &Path, failure: &CellFailure) -> Result<()> {
    if let Some(snapshot) = &failure.snapshot {
        let (model, report) = &**snapshot;
        fs::create_dir_all(out)?;
        fs::write(out.join("model.diverged.json"), model.to_json())?;
        write_report(&out.join("train_report.diverged.csv"), report)?;
    }
    Ok(())
}
