//! Sample-wise LMS backpropagation.
//!
//! Every parameter `w` moves by `-mu_w * d(eps^2 / 2)/dw` with `eps = y - y_hat`.
//! The composite steps are `4 alpha / Q` for DCT coefficients (the retained
//! cosines carry total power `Q/2`) and `2 alpha / P` for linear weights,
//! where `P` is the damped power of the layer input.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activation::{Activation, AdaptiveActivation, Nonlinearity};
use crate::dct::{cos_basis, BasisConfig};
use crate::error::{EnnError, Result};
use crate::network::{BenchmarkModel, EnnModel, ForwardTrace, Network};
use crate::tasks::Sample;

/// Upper bound on the summed step sizes.
pub const STABILITY_LIMIT: f64 = 0.1;

/// Step sizes, damping and epoch schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmsConfig {
    pub alpha_hidden_dct: f64,
    pub alpha_output_dct: f64,
    pub alpha_hidden_linear: f64,
    pub alpha_output_linear: f64,
    pub beta: f64,
    pub epochs: usize,
    pub shuffle_seed: u64,
}

impl Default for LmsConfig {
    fn default() -> Self {
        Self {
            alpha_hidden_dct: 1e-3,
            alpha_output_dct: 1e-4,
            alpha_hidden_linear: 5e-3,
            alpha_output_linear: 5e-5,
            beta: 0.999,
            epochs: 1,
            shuffle_seed: 0,
        }
    }
}

impl LmsConfig {
    /// `6 a1 + 6 a2 + a3 + a4`, with 6 the default number of coefficients per activation.
    pub fn stability_sum(&self) -> f64 {
        6.0 * self.alpha_hidden_dct
            + 6.0 * self.alpha_output_dct
            + self.alpha_hidden_linear
            + self.alpha_output_linear
    }

    pub fn validate(&self) -> Result<()> {
        let alphas = [
            ("alpha_hidden_dct", self.alpha_hidden_dct),
            ("alpha_output_dct", self.alpha_output_dct),
            ("alpha_hidden_linear", self.alpha_hidden_linear),
            ("alpha_output_linear", self.alpha_output_linear),
        ];
        for (name, a) in alphas {
            if !(a > 0.0 && a.is_finite()) {
                return Err(EnnError::InvalidConfig(format!(
                    "{name} must be positive, got {a}"
                )));
            }
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(EnnError::InvalidConfig(format!(
                "beta must lie in [0, 1), got {}",
                self.beta
            )));
        }
        let sum = self.stability_sum();
        if sum >= STABILITY_LIMIT {
            return Err(EnnError::InvalidConfig(format!(
                "step sizes sum to {sum}, must stay below {STABILITY_LIMIT}"
            )));
        }
        Ok(())
    }
}

/// Damped input powers of the two layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimates {
    pub p0: f64,
    pub p1: f64,
}

impl PowerEstimates {
    /// `P0 = M0 + 1` and `P1 = Q/2`.
    pub fn initial(m0: usize, basis: BasisConfig) -> Self {
        Self {
            p0: (m0 + 1) as f64,
            p1: basis.retained() as f64,
        }
    }

    fn update(&mut self, trace: &ForwardTrace, beta: f64) {
        self.p0 = update_power(self.p0, &trace.s0, beta);
        self.p1 = update_power(self.p1, &trace.s1, beta);
    }
}

/// `beta p + (1 - beta) s^T s`.
pub fn update_power(p: f64, s: &[f64], beta: f64) -> f64 {
    let energy: f64 = s.iter().map(|v| v * v).sum();
    beta * p + (1.0 - beta) * energy
}

/// Composite step sizes applied in one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizes {
    pub output_dct: f64,
    pub output_linear: f64,
    pub hidden_dct: f64,
    pub hidden_linear: f64,
}

impl StepSizes {
    pub fn new(config: &LmsConfig, basis: BasisConfig, powers: &PowerEstimates) -> Self {
        let q = basis.budget() as f64;
        Self {
            output_dct: 4.0 * config.alpha_output_dct / q,
            output_linear: 2.0 * config.alpha_output_linear / powers.p1,
            hidden_dct: 4.0 * config.alpha_hidden_dct / q,
            hidden_linear: 2.0 * config.alpha_hidden_linear / powers.p0,
        }
    }
}

fn error_of(trace: &ForwardTrace, y: f64) -> Result<f64> {
    let eps = y - trace.y_hat;
    if eps.is_finite() {
        Ok(eps)
    } else {
        Err(EnnError::NonFinite(format!("error y - y_hat = {eps}")))
    }
}

fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(EnnError::NonFinite(format!("{what} update produced {v}"))),
        None => Ok(()),
    }
}

/// One synchronous LMS update of every ENN parameter from `trace`.
///
/// The powers are refreshed with the current sample first and the linear
/// steps are normalized by the refreshed values. All gradients read the
/// pre-update parameters. A step that would produce a non-finite parameter is
/// rejected and leaves the model untouched.
pub fn lms_step(
    model: &mut EnnModel,
    trace: &ForwardTrace,
    y: f64,
    config: &LmsConfig,
    powers: &mut PowerEstimates,
) -> Result<StepSizes> {
    let eps = error_of(trace, y)?;
    powers.update(trace, config.beta);
    let steps = StepSizes::new(config, model.basis(), powers);
    let n = model.basis().grid_len();
    let m0 = model.m0();
    let m1 = model.m1();

    let out_coeffs = model.output_activation().coeffs().values();
    // d y_hat / d z2 = -(pi/2) * out_sine.
    let out_sine = model
        .output_activation()
        .coeffs()
        .weighted_sine_sum(trace.z2);
    let half_pi = std::f64::consts::FRAC_PI_2;

    let new_out_coeffs: Vec<f64> = out_coeffs
        .iter()
        .enumerate()
        .map(|(i, f)| f + steps.output_dct * eps * cos_basis(i + 1, trace.z2, n))
        .collect();

    let new_out_weights: Vec<f64> = model
        .output_weights()
        .iter()
        .zip(&trace.s1)
        .map(|(a, s)| a - steps.output_linear * eps * half_pi * s * out_sine)
        .collect();

    let mut new_hidden_coeffs = Vec::with_capacity(m1);
    let mut new_hidden_weights = Vec::with_capacity((m0 + 1) * m1);
    for k in 0..m1 {
        let a2k = model.output_weights()[k + 1];
        let z1k = trace.z1[k];
        let act = &model.hidden_activations()[k];
        let coeffs: Vec<f64> = act
            .coeffs()
            .values()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f - steps.hidden_dct * eps * half_pi * a2k * cos_basis(i + 1, z1k, n) * out_sine
            })
            .collect();
        new_hidden_coeffs.push(coeffs);

        let hid_sine = act.coeffs().weighted_sine_sum(z1k);
        let common = steps.hidden_linear * eps * half_pi * half_pi * a2k * out_sine * hid_sine;
        new_hidden_weights.extend(
            model
                .hidden_column(k)
                .iter()
                .zip(&trace.s0)
                .map(|(a, s)| a + common * s),
        );
    }

    ensure_finite(&new_out_coeffs, "output DCT")?;
    ensure_finite(&new_out_weights, "output linear")?;
    for c in &new_hidden_coeffs {
        ensure_finite(c, "hidden DCT")?;
    }
    ensure_finite(&new_hidden_weights, "hidden linear")?;

    model
        .output_activation_mut()
        .coeff_values_mut()
        .copy_from_slice(&new_out_coeffs);
    model.output_weights_mut().copy_from_slice(&new_out_weights);
    for (k, coeffs) in new_hidden_coeffs.iter().enumerate() {
        model.hidden_activations_mut()[k]
            .coeff_values_mut()
            .copy_from_slice(coeffs);
        model
            .hidden_column_mut(k)
            .copy_from_slice(&new_hidden_weights[k * (m0 + 1)..(k + 1) * (m0 + 1)]);
    }
    Ok(steps)
}

/// LMS update of the linear weights only; activations stay frozen.
pub fn linear_step<A: Nonlinearity>(
    model: &mut Network<A>,
    trace: &ForwardTrace,
    y: f64,
    config: &LmsConfig,
    powers: &mut PowerEstimates,
) -> Result<StepSizes> {
    let eps = error_of(trace, y)?;
    powers.update(trace, config.beta);
    let steps = StepSizes::new(config, model.basis(), powers);
    let m0 = model.m0();
    let m1 = model.m1();
    let out_slope = model.output_activation().derivative(trace.z2);

    let new_out_weights: Vec<f64> = model
        .output_weights()
        .iter()
        .zip(&trace.s1)
        .map(|(a, s)| a + steps.output_linear * eps * out_slope * s)
        .collect();
    let mut new_hidden_weights = Vec::with_capacity((m0 + 1) * m1);
    for k in 0..m1 {
        let a2k = model.output_weights()[k + 1];
        let hid_slope = model.hidden_activations()[k].derivative(trace.z1[k]);
        let common = steps.hidden_linear * eps * out_slope * a2k * hid_slope;
        new_hidden_weights.extend(
            model
                .hidden_column(k)
                .iter()
                .zip(&trace.s0)
                .map(|(a, s)| a + common * s),
        );
    }
    ensure_finite(&new_out_weights, "output linear")?;
    ensure_finite(&new_hidden_weights, "hidden linear")?;
    model.output_weights_mut().copy_from_slice(&new_out_weights);
    for k in 0..m1 {
        model
            .hidden_column_mut(k)
            .copy_from_slice(&new_hidden_weights[k * (m0 + 1)..(k + 1) * (m0 + 1)]);
    }
    Ok(steps)
}

/// Loss curve of one training run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    /// Mean of `eps^2` over each epoch, measured before each sample's update.
    pub epoch_mse: Vec<f64>,
    pub iterations: usize,
}

/// Training failure. `Diverged` carries the last finite model.
#[derive(Debug, Error)]
pub enum TrainError<M> {
    #[error(transparent)]
    Invalid(#[from] EnnError),
    #[error("training diverged at iteration {iteration}: {cause}")]
    Diverged {
        iteration: usize,
        cause: EnnError,
        snapshot: Box<M>,
        report: TrainReport,
    },
}

type Stepper<A> =
    fn(&mut Network<A>, &ForwardTrace, f64, &LmsConfig, &mut PowerEstimates) -> Result<StepSizes>;

fn run<A: Nonlinearity>(
    mut model: Network<A>,
    data: &[Sample],
    config: &LmsConfig,
    step: Stepper<A>,
) -> Result<(Network<A>, TrainReport), TrainError<Network<A>>> {
    config.validate()?;
    if data.is_empty() {
        return Err(EnnError::EmptyDataset.into());
    }
    let mut powers = PowerEstimates::initial(model.m0(), model.basis());
    let mut rng = ChaCha8Rng::seed_from_u64(config.shuffle_seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut report = TrainReport::default();

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut sq_sum = 0.0;
        for &i in &order {
            let sample = &data[i];
            let trace = model.forward(&sample.x)?;
            let outcome = step(&mut model, &trace, sample.y, config, &mut powers);
            let eps = sample.y - trace.y_hat;
            sq_sum += eps * eps;
            if let Err(cause) = outcome {
                return Err(TrainError::Diverged {
                    iteration: report.iterations,
                    cause,
                    snapshot: Box::new(model),
                    report,
                });
            }
            report.iterations += 1;
        }
        let epoch_mse = sq_sum / data.len() as f64;
        if !epoch_mse.is_finite() {
            return Err(TrainError::Diverged {
                iteration: report.iterations,
                cause: EnnError::NonFinite(format!("running MSE {epoch_mse}")),
                snapshot: Box::new(model),
                report,
            });
        }
        report.epoch_mse.push(epoch_mse);
    }
    Ok((model, report))
}

/// Trains every ENN parameter over `config.epochs` shuffled passes.
pub fn train(
    model: EnnModel,
    data: &[Sample],
    config: &LmsConfig,
) -> Result<(EnnModel, TrainReport), TrainError<EnnModel>> {
    run(model, data, config, lms_step)
}

/// Trains only the linear weights of a benchmark model.
pub fn train_benchmark(
    model: BenchmarkModel,
    data: &[Sample],
    config: &LmsConfig,
) -> Result<(BenchmarkModel, TrainReport), TrainError<BenchmarkModel>> {
    let kind = model.kind;
    match run(model.network, data, config, linear_step::<Activation>) {
        Ok((network, report)) => Ok((BenchmarkModel { kind, network }, report)),
        Err(TrainError::Invalid(e)) => Err(TrainError::Invalid(e)),
        Err(TrainError::Diverged {
            iteration,
            cause,
            snapshot,
            report,
        }) => Err(TrainError::Diverged {
            iteration,
            cause,
            snapshot: Box::new(BenchmarkModel {
                kind,
                network: *snapshot,
            }),
            report,
        }),
    }
}

/// Address of one scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamCoord {
    /// Coefficient `index` (0-based, harmonic `2 index + 1`) of the output activation.
    OutputDct(usize),
    /// Output weight `index`; 0 is the bias.
    OutputLinear(usize),
    /// Coefficient `index` of hidden neuron `neuron`.
    HiddenDct { neuron: usize, index: usize },
    /// Entry `input` (0 is the bias) of hidden column `neuron`.
    HiddenLinear { neuron: usize, input: usize },
}

/// Scalar access to trainable parameters.
pub trait Parameterized {
    /// Every trainable coordinate, in a fixed order.
    fn coords(&self) -> Vec<ParamCoord>;
    fn param(&self, coord: ParamCoord) -> Option<f64>;
    fn param_mut(&mut self, coord: ParamCoord) -> Option<&mut f64>;
}

fn linear_coords<A>(model: &Network<A>) -> Vec<ParamCoord> {
    let mut out: Vec<ParamCoord> = (0..=model.m1()).map(ParamCoord::OutputLinear).collect();
    for neuron in 0..model.m1() {
        out.extend((0..=model.m0()).map(|input| ParamCoord::HiddenLinear { neuron, input }));
    }
    out
}

fn linear_param_mut<A>(model: &mut Network<A>, coord: ParamCoord) -> Option<&mut f64> {
    match coord {
        ParamCoord::OutputLinear(i) => model.output_weights_mut().get_mut(i),
        ParamCoord::HiddenLinear { neuron, input } if neuron < model.m1() => {
            model.hidden_column_mut(neuron).get_mut(input)
        }
        _ => None,
    }
}

impl Parameterized for EnnModel {
    fn coords(&self) -> Vec<ParamCoord> {
        let r = self.basis().retained();
        let mut out: Vec<ParamCoord> = (0..r).map(ParamCoord::OutputDct).collect();
        out.extend(linear_coords(self));
        for neuron in 0..self.m1() {
            out.extend((0..r).map(|index| ParamCoord::HiddenDct { neuron, index }));
        }
        out
    }

    fn param(&self, coord: ParamCoord) -> Option<f64> {
        self.clone().param_mut(coord).map(|v| *v)
    }

    fn param_mut(&mut self, coord: ParamCoord) -> Option<&mut f64> {
        match coord {
            ParamCoord::OutputDct(i) => self.output_activation_mut().coeff_values_mut().get_mut(i),
            ParamCoord::HiddenDct { neuron, index } => self
                .hidden_activations_mut()
                .get_mut(neuron)
                .and_then(|a: &mut AdaptiveActivation| a.coeff_values_mut().get_mut(index)),
            _ => linear_param_mut(self, coord),
        }
    }
}

impl Parameterized for Network<Activation> {
    fn coords(&self) -> Vec<ParamCoord> {
        linear_coords(self)
    }

    fn param(&self, coord: ParamCoord) -> Option<f64> {
        self.clone().param_mut(coord).map(|v| *v)
    }

    fn param_mut(&mut self, coord: ParamCoord) -> Option<&mut f64> {
        linear_param_mut(self, coord)
    }
}

/// Instantaneous loss `(y - y_hat)^2 / 2`.
pub fn sample_loss<A: Nonlinearity>(model: &Network<A>, x: &[f64], y: f64) -> Result<f64> {
    let y_hat = model.predict(x)?;
    Ok(0.5 * (y - y_hat).powi(2))
}

/// Central difference of the instantaneous loss along one coordinate.
pub fn finite_difference_gradient<A>(
    model: &Network<A>,
    x: &[f64],
    y: f64,
    coord: ParamCoord,
    h: f64,
) -> Result<f64>
where
    A: Nonlinearity + Clone,
    Network<A>: Parameterized,
{
    if h.is_nan() || h <= 0.0 {
        return Err(EnnError::InvalidConfig(format!(
            "step h must be positive, got {h}"
        )));
    }
    let mut probe = model.clone();
    let base = probe
        .param(coord)
        .ok_or_else(|| EnnError::InvalidConfig(format!("no parameter at {coord:?}")))?;
    *probe.param_mut(coord).expect("checked above") = base + h;
    let up = sample_loss(&probe, x, y)?;
    *probe.param_mut(coord).expect("checked above") = base - h;
    let down = sample_loss(&probe, x, y)?;
    Ok((up - down) / (2.0 * h))
}

/// Composite step that `steps` assigns to `coord`.
pub fn step_for(steps: &StepSizes, coord: ParamCoord) -> f64 {
    match coord {
        ParamCoord::OutputDct(_) => steps.output_dct,
        ParamCoord::OutputLinear(_) => steps.output_linear,
        ParamCoord::HiddenDct { .. } => steps.hidden_dct,
        ParamCoord::HiddenLinear { .. } => steps.hidden_linear,
    }
}
