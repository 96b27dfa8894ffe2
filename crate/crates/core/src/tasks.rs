//! Synthetic two-input tasks: eight classification geometries, three
//! regression targets, and the metrics used to score models on them.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::Nonlinearity;
use crate::error::{EnnError, Result};
use crate::network::{predict_class, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Classification,
    Regression,
}

/// One labeled point.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

/// The named tasks. Classification labels are the sign of a discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Linear,
    Quadratic,
    Cubic,
    Blob,
    TwoCircles,
    Ring,
    Lines,
    Face,
    Mean,
    QuarterSumSquares,
    Product,
}

const RING_RADIUS: f64 = 0.55;
const RING_HALF_WIDTH: f64 = 0.2;

fn disk(x: &[f64], cx: f64, cy: f64, r: f64) -> f64 {
    r - (x[0] - cx).hypot(x[1] - cy)
}

fn ring(x: &[f64]) -> f64 {
    RING_HALF_WIDTH - (x[0].hypot(x[1]) - RING_RADIUS).abs()
}

impl Problem {
    pub const CLASSIFICATION: [Problem; 8] = [
        Problem::Linear,
        Problem::Quadratic,
        Problem::Cubic,
        Problem::Blob,
        Problem::TwoCircles,
        Problem::Ring,
        Problem::Lines,
        Problem::Face,
    ];
    pub const REGRESSION: [Problem; 3] =
        [Problem::Mean, Problem::QuarterSumSquares, Problem::Product];

    pub fn kind(&self) -> TaskKind {
        match self {
            Problem::Mean | Problem::QuarterSumSquares | Problem::Product => TaskKind::Regression,
            _ => TaskKind::Classification,
        }
    }

    /// Canonical name: `p1`..`p8` for classification, the target name otherwise.
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Linear => "p1",
            Problem::Quadratic => "p2",
            Problem::Cubic => "p3",
            Problem::Blob => "p4",
            Problem::TwoCircles => "p5",
            Problem::Ring => "p6",
            Problem::Lines => "p7",
            Problem::Face => "p8",
            Problem::Mean => "mean",
            Problem::QuarterSumSquares => "quarter-sum-squares",
            Problem::Product => "product",
        }
    }

    /// Discriminant `d(x)` for classification tasks; `None` for regression.
    pub fn discriminant(&self, x: &[f64]) -> Option<f64> {
        let (x1, x2) = (x[0], x[1]);
        let d = match self {
            Problem::Linear => x1 - x2,
            Problem::Quadratic => x2 - (2.0 * x1 * x1 - 0.5),
            Problem::Cubic => x2 - 2.5 * x1.powi(3) + x1,
            Problem::Blob => disk(x, 0.2, 0.1, 0.45),
            Problem::TwoCircles => disk(x, -0.45, -0.45, 0.35).max(disk(x, 0.45, 0.45, 0.35)),
            Problem::Ring => ring(x),
            Problem::Lines => (1.5 * std::f64::consts::PI * (x1 - x2)).sin(),
            Problem::Face => ring(x)
                .max(disk(x, -0.3, 0.25, 0.15))
                .max(disk(x, 0.3, 0.25, 0.15)),
            Problem::Mean | Problem::QuarterSumSquares | Problem::Product => return None,
        };
        Some(d)
    }

    /// Label of `x`: `sign(d(x))` with `sign(0) = +1`, or the regression target.
    pub fn label(&self, x: &[f64]) -> Result<f64> {
        if x.len() != 2 {
            return Err(EnnError::DimensionMismatch {
                expected: 2,
                got: x.len(),
            });
        }
        if let Some(d) = self.discriminant(x) {
            return Ok(predict_class(d));
        }
        let (x1, x2) = (x[0], x[1]);
        Ok(match self {
            Problem::Mean => 0.5 * (x1 + x2),
            Problem::QuarterSumSquares => 0.25 * (x1 * x1 + x2 * x2),
            Problem::Product => x1 * x2,
            _ => unreachable!("classification handled above"),
        })
    }
}

impl FromStr for Problem {
    type Err = EnnError;

    fn from_str(s: &str) -> Result<Self> {
        let p = match s.to_ascii_lowercase().as_str() {
            "p1" | "linear" => Problem::Linear,
            "p2" | "quadratic" => Problem::Quadratic,
            "p3" | "cubic" => Problem::Cubic,
            "p4" | "blob" => Problem::Blob,
            "p5" | "two-circles" => Problem::TwoCircles,
            "p6" | "ring" => Problem::Ring,
            "p7" | "lines" | "stripes" => Problem::Lines,
            "p8" | "face" => Problem::Face,
            "mean" => Problem::Mean,
            "quarter-sum-squares" => Problem::QuarterSumSquares,
            "product" => Problem::Product,
            _ => return Err(EnnError::UnknownProblem(s.to_string())),
        };
        Ok(p)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn label(problem: Problem, x: &[f64]) -> Result<f64> {
    problem.label(x)
}

/// `n` samples with inputs uniform on `[-1, 1]^2`, reproducible from `seed`.
pub fn generate_dataset(problem: Problem, n: usize, seed: u64) -> Result<Vec<Sample>> {
    if n == 0 {
        return Err(EnnError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = vec![rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
            let y = problem.label(&x)?;
            Ok(Sample { x, y })
        })
        .collect()
}

fn outputs<A: Nonlinearity + Sync>(model: &Network<A>, data: &[Sample]) -> Result<Vec<f64>> {
    data.par_iter().map(|s| model.predict(&s.x)).collect()
}

/// Fraction of samples whose hard decision equals the label.
pub fn accuracy<A: Nonlinearity + Sync>(model: &Network<A>, data: &[Sample]) -> Result<f64> {
    if data.is_empty() {
        return Err(EnnError::EmptyDataset);
    }
    if data.iter().any(|s| s.y != 1.0 && s.y != -1.0) {
        return Err(EnnError::NotClassification);
    }
    let y_hat = outputs(model, data)?;
    let hits = y_hat
        .iter()
        .zip(data)
        .filter(|(&p, s)| predict_class(p) == s.y)
        .count();
    Ok(hits as f64 / data.len() as f64)
}

/// Mean squared error of the soft output.
pub fn mse<A: Nonlinearity + Sync>(model: &Network<A>, data: &[Sample]) -> Result<f64> {
    if data.is_empty() {
        return Err(EnnError::EmptyDataset);
    }
    let y_hat = outputs(model, data)?;
    let sum: f64 = y_hat.iter().zip(data).map(|(p, s)| (s.y - p).powi(2)).sum();
    Ok(sum / data.len() as f64)
}
