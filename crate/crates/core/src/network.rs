//! Two-layer network: affine hidden layer with per-neuron activations, affine
//! output with a single output activation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activation::{
    identity_init, Activation, AdaptiveActivation, FixedActivation, Nonlinearity,
    BENCHMARK_SIGMOID_SLOPE,
};
use crate::dct::BasisConfig;
use crate::error::{EnnError, Result};
use crate::tasks::TaskKind;

/// Hidden-weight directions (bias first) assigned cyclically at initialization.
pub const INIT_DIRECTIONS: [[f64; 3]; 6] = [
    [0.0, 0.0, 1.0],
    [0.0, 1.0, 0.0],
    [0.0, 1.0, -1.0],
    [0.0, -1.0, 1.0],
    [0.0, 1.0, 1.0],
    [0.0, -1.0, -1.0],
];

/// Intermediate signals of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// Input with a leading 1.
    pub s0: Vec<f64>,
    /// Hidden pre-activations.
    pub z1: Vec<f64>,
    /// Hidden outputs with a leading 1.
    pub s1: Vec<f64>,
    pub z2: f64,
    pub y_hat: f64,
}

/// Two-layer network generic over its activation type.
///
/// `hidden_weights` is the `(m0+1) x m1` matrix stored column by column;
/// column `k` feeds hidden neuron `k` and holds its bias in row 0.
/// `output_weights` has length `m1 + 1` with the bias at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<A> {
    m0: usize,
    m1: usize,
    basis: BasisConfig,
    hidden_weights: Vec<f64>,
    hidden_activations: Vec<A>,
    output_weights: Vec<f64>,
    output_activation: A,
}

/// The fully adaptive model: every activation is a trainable DCT series.
pub type EnnModel = Network<AdaptiveActivation>;

impl<A> Network<A> {
    pub fn from_parts(
        m0: usize,
        m1: usize,
        basis: BasisConfig,
        hidden_weights: Vec<f64>,
        hidden_activations: Vec<A>,
        output_weights: Vec<f64>,
        output_activation: A,
    ) -> Result<Self> {
        if m0 == 0 || m1 == 0 {
            return Err(EnnError::InvalidConfig(format!(
                "layer sizes must be positive (m0={m0}, m1={m1})"
            )));
        }
        let expect = |expected: usize, got: usize| {
            if expected == got {
                Ok(())
            } else {
                Err(EnnError::DimensionMismatch { expected, got })
            }
        };
        expect((m0 + 1) * m1, hidden_weights.len())?;
        expect(m1, hidden_activations.len())?;
        expect(m1 + 1, output_weights.len())?;
        if hidden_weights
            .iter()
            .chain(output_weights.iter())
            .any(|w| !w.is_finite())
        {
            return Err(EnnError::NonFinite("linear weight".into()));
        }
        Ok(Self {
            m0,
            m1,
            basis,
            hidden_weights,
            hidden_activations,
            output_weights,
            output_activation,
        })
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn basis(&self) -> BasisConfig {
        self.basis
    }

    /// Column-major hidden weight matrix.
    pub fn hidden_weights(&self) -> &[f64] {
        &self.hidden_weights
    }

    /// Weights of hidden neuron `k` (0-based), bias first.
    pub fn hidden_column(&self, k: usize) -> &[f64] {
        let w = self.m0 + 1;
        &self.hidden_weights[k * w..(k + 1) * w]
    }

    pub fn hidden_column_mut(&mut self, k: usize) -> &mut [f64] {
        let w = self.m0 + 1;
        &mut self.hidden_weights[k * w..(k + 1) * w]
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.output_weights
    }

    pub fn output_weights_mut(&mut self) -> &mut [f64] {
        &mut self.output_weights
    }

    pub fn hidden_activations(&self) -> &[A] {
        &self.hidden_activations
    }

    pub fn hidden_activations_mut(&mut self) -> &mut [A] {
        &mut self.hidden_activations
    }

    pub fn output_activation(&self) -> &A {
        &self.output_activation
    }

    pub fn output_activation_mut(&mut self) -> &mut A {
        &mut self.output_activation
    }

    /// Converts every activation, keeping weights and shape.
    pub fn map_activations<B>(self, mut f: impl FnMut(A) -> B) -> Network<B> {
        Network {
            m0: self.m0,
            m1: self.m1,
            basis: self.basis,
            hidden_weights: self.hidden_weights,
            hidden_activations: self.hidden_activations.into_iter().map(&mut f).collect(),
            output_weights: self.output_weights,
            output_activation: f(self.output_activation),
        }
    }

    /// `a_1^(k)T [1; x]` for hidden neuron `k`.
    pub fn hidden_pre_activation(&self, k: usize, x: &[f64]) -> f64 {
        let col = self.hidden_column(k);
        col[0] + col[1..].iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.m0 {
            return Err(EnnError::DimensionMismatch {
                expected: self.m0,
                got: x.len(),
            });
        }
        Ok(())
    }
}

impl<A: Nonlinearity> Network<A> {
    pub fn forward(&self, x: &[f64]) -> Result<ForwardTrace> {
        self.check_input(x)?;
        let mut s0 = Vec::with_capacity(self.m0 + 1);
        s0.push(1.0);
        s0.extend_from_slice(x);

        let z1: Vec<f64> = (0..self.m1)
            .map(|k| self.hidden_pre_activation(k, x))
            .collect();
        let mut s1 = Vec::with_capacity(self.m1 + 1);
        s1.push(1.0);
        s1.extend(
            z1.iter()
                .zip(&self.hidden_activations)
                .map(|(&z, act)| act.eval(z)),
        );
        let z2: f64 = self
            .output_weights
            .iter()
            .zip(&s1)
            .map(|(a, s)| a * s)
            .sum();
        let y_hat = self.output_activation.eval(z2);
        Ok(ForwardTrace {
            s0,
            z1,
            s1,
            z2,
            y_hat,
        })
    }

    /// Output `y_hat` without keeping the trace.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.forward(x).map(|t| t.y_hat)
    }
}

/// Hard decision: `+1` for `y_hat >= 0`, else `-1`.
pub fn predict_class(y_hat: f64) -> f64 {
    if y_hat >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn init_hidden_weights(m0: usize, m1: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity((m0 + 1) * m1);
    for k in 0..m1 {
        if m0 == 2 {
            w.extend_from_slice(&INIT_DIRECTIONS[k % INIT_DIRECTIONS.len()]);
        } else {
            // Axis directions, alternating sign, for inputs other than two.
            let mut col = vec![0.0; m0 + 1];
            let axis = k % m0;
            col[axis + 1] = if (k / m0).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            w.extend(col);
        }
    }
    w
}

fn init_output_weights(m1: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..=m1).map(|_| rng.gen_range(-0.5..=0.5)).collect()
}

/// Fresh ENN: identity-like activations everywhere, diverse hidden
/// orientations and uniform `[-0.5, 0.5]` output weights (bias included).
pub fn init_model(m0: usize, m1: usize, basis: BasisConfig, seed: u64) -> Result<EnnModel> {
    if m1 == 0 {
        return Err(EnnError::InvalidConfig("hidden width must be >= 1".into()));
    }
    let identity = identity_init(basis);
    Network::from_parts(
        m0,
        m1,
        basis,
        init_hidden_weights(m0, m1),
        vec![identity.clone(); m1],
        init_output_weights(m1, seed),
        identity,
    )
}

/// Fixed-activation reference models sharing the ENN architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkKind {
    Relu,
    Sigm,
    Fdct,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 3] = [
        BenchmarkKind::Relu,
        BenchmarkKind::Sigm,
        BenchmarkKind::Fdct,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkKind::Relu => "relu",
            BenchmarkKind::Sigm => "sigm",
            BenchmarkKind::Fdct => "fdct",
        }
    }
}

/// A network whose activations are never trained.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkModel {
    pub kind: BenchmarkKind,
    pub network: Network<Activation>,
}

impl BenchmarkModel {
    pub fn forward(&self, x: &[f64]) -> Result<ForwardTrace> {
        self.network.forward(x)
    }
}

/// Benchmark model for `task`: sigmoid output for classification, identity
/// for regression; F-DCT uses the DCT sigmoid on both layers when classifying.
pub fn init_benchmark(
    kind: BenchmarkKind,
    task: TaskKind,
    m0: usize,
    m1: usize,
    basis: BasisConfig,
    seed: u64,
) -> Result<BenchmarkModel> {
    if m1 == 0 {
        return Err(EnnError::InvalidConfig("hidden width must be >= 1".into()));
    }
    let hidden = match kind {
        BenchmarkKind::Relu => Activation::Fixed(FixedActivation::Relu),
        BenchmarkKind::Sigm => Activation::Fixed(FixedActivation::Sigmoid),
        BenchmarkKind::Fdct => {
            Activation::Adaptive(AdaptiveActivation::sigmoid(basis, BENCHMARK_SIGMOID_SLOPE)?)
        }
    };
    let output = match (task, kind) {
        (TaskKind::Regression, _) => Activation::Fixed(FixedActivation::Identity),
        (TaskKind::Classification, BenchmarkKind::Fdct) => hidden.clone(),
        (TaskKind::Classification, _) => Activation::Fixed(FixedActivation::Sigmoid),
    };
    let network = Network::from_parts(
        m0,
        m1,
        basis,
        init_hidden_weights(m0, m1),
        vec![hidden; m1],
        init_output_weights(m1, seed),
        output,
    )?;
    Ok(BenchmarkModel { kind, network })
}
