//! Adaptive (DCT-parameterized) and fixed activation functions.

use serde::{Deserialize, Serialize};

use crate::dct::{analyze_fn, BasisConfig, DctCoefficients};
use crate::error::{EnnError, Result};

/// Slope of the zero-centered sigmoid used by the fixed benchmarks.
pub const BENCHMARK_SIGMOID_SLOPE: f64 = 4.0;

/// Anything with a value and an analytic first derivative.
pub trait Nonlinearity {
    fn eval(&self, z: f64) -> f64;
    fn derivative(&self, z: f64) -> f64;
}

/// Zero-centered logistic, `2 / (1 + exp(-slope z)) - 1`, range `(-1, 1)`.
pub fn centered_sigmoid(z: f64, slope: f64) -> f64 {
    2.0 / (1.0 + (-slope * z).exp()) - 1.0
}

fn centered_sigmoid_derivative(z: f64, slope: f64) -> f64 {
    let s = centered_sigmoid(z, slope);
    0.5 * slope * (1.0 - s * s)
}

/// A nonlinearity given by a truncated odd-harmonic DCT series.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveActivation {
    coeffs: DctCoefficients,
}

impl AdaptiveActivation {
    pub fn new(coeffs: DctCoefficients) -> Self {
        Self { coeffs }
    }

    pub fn zeros(config: BasisConfig) -> Self {
        Self::new(DctCoefficients::zeros(config))
    }

    /// DCT approximation of `f(z) = z` on `[-1, 1]`.
    pub fn identity(config: BasisConfig) -> Self {
        Self::new(analyze_fn(|x| x, config).expect("grid has exactly N samples"))
    }

    /// DCT approximation of the zero-centered sigmoid with the given slope.
    pub fn sigmoid(config: BasisConfig, slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(EnnError::InvalidConfig(format!(
                "sigmoid slope must be positive, got {slope}"
            )));
        }
        analyze_fn(|x| centered_sigmoid(x, slope), config).map(Self::new)
    }

    pub fn coeffs(&self) -> &DctCoefficients {
        &self.coeffs
    }

    pub(crate) fn coeff_values_mut(&mut self) -> &mut [f64] {
        self.coeffs.values_mut()
    }

    pub fn config(&self) -> BasisConfig {
        self.coeffs.config()
    }
}

impl Nonlinearity for AdaptiveActivation {
    fn eval(&self, z: f64) -> f64 {
        self.coeffs.synthesize(z)
    }

    fn derivative(&self, z: f64) -> f64 {
        self.coeffs.derivative(z)
    }
}

pub fn identity_init(config: BasisConfig) -> AdaptiveActivation {
    AdaptiveActivation::identity(config)
}

pub fn sigmoid_dct_init(config: BasisConfig, slope: f64) -> Result<AdaptiveActivation> {
    AdaptiveActivation::sigmoid(config, slope)
}

/// Non-trainable activations used by the benchmark models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedActivation {
    Relu,
    Sigmoid,
    Identity,
}

impl Nonlinearity for FixedActivation {
    fn eval(&self, z: f64) -> f64 {
        match self {
            FixedActivation::Relu => z.max(0.0),
            FixedActivation::Sigmoid => centered_sigmoid(z, BENCHMARK_SIGMOID_SLOPE),
            FixedActivation::Identity => z,
        }
    }

    fn derivative(&self, z: f64) -> f64 {
        match self {
            // Subgradient 0 at the kink.
            FixedActivation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            FixedActivation::Sigmoid => centered_sigmoid_derivative(z, BENCHMARK_SIGMOID_SLOPE),
            FixedActivation::Identity => 1.0,
        }
    }
}

/// Either kind of activation, for models that mix them.
#[derive(Debug, Clone, PartialEq)]
pub enum Activation {
    Adaptive(AdaptiveActivation),
    Fixed(FixedActivation),
}

impl Nonlinearity for Activation {
    fn eval(&self, z: f64) -> f64 {
        match self {
            Activation::Adaptive(a) => a.eval(z),
            Activation::Fixed(f) => f.eval(z),
        }
    }

    fn derivative(&self, z: f64) -> f64 {
        match self {
            Activation::Adaptive(a) => a.derivative(z),
            Activation::Fixed(f) => f.derivative(z),
        }
    }
}

/// `points` evenly spaced `(z, act(z))` pairs over `[lo, hi]`.
pub fn curve<A: Nonlinearity + ?Sized>(
    act: &A,
    lo: f64,
    hi: f64,
    points: usize,
) -> Vec<(f64, f64)> {
    match points {
        0 => Vec::new(),
        1 => vec![(lo, act.eval(lo))],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    let z = if i == points - 1 {
                        hi
                    } else {
                        lo + step * i as f64
                    };
                    (z, act.eval(z))
                })
                .collect()
        }
    }
}
