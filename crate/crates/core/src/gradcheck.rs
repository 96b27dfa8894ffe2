//! Randomized comparison of the closed-form LMS deltas against central
//! finite differences of the instantaneous loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::activation::{Activation, AdaptiveActivation};
use crate::dct::{BasisConfig, DctCoefficients};
use crate::error::Result;
use crate::network::{init_benchmark, BenchmarkKind, EnnModel, ForwardTrace, Network};
use crate::tasks::TaskKind;
use crate::training::{
    finite_difference_gradient, linear_step, lms_step, step_for, LmsConfig, ParamCoord,
    Parameterized, PowerEstimates, StepSizes,
};

pub const FD_STEP: f64 = 1e-6;
pub const TOLERANCE: f64 = 1e-5;
/// Gradients are compared relative to `max(|closed|, |fd|, SCALE_FLOOR)`.
pub const SCALE_FLOOR: f64 = 1e-3;
/// Benchmark samples with a hidden pre-activation this close to 0 are skipped.
pub const KINK_MARGIN: f64 = 1e-3;

/// Worst coordinate seen by a check.
#[derive(Debug, Clone, PartialEq)]
pub struct Offender {
    pub trial: usize,
    pub coord: ParamCoord,
    pub closed_form: f64,
    pub finite_difference: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub trials: usize,
    pub checked: usize,
    pub max_deviation: f64,
    pub worst: Option<Offender>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.checked > 0 && self.max_deviation < TOLERANCE
    }
}

pub fn relative_deviation(closed: f64, fd: f64) -> f64 {
    (closed - fd).abs() / closed.abs().max(fd.abs()).max(SCALE_FLOOR)
}

fn uniform_vec(rng: &mut impl Rng, len: usize, half_width: f64) -> Vec<f64> {
    (0..len)
        .map(|_| rng.gen_range(-half_width..=half_width))
        .collect()
}

/// A model with every parameter drawn at random. Coefficient `q` is uniform
/// on `[-1, 1] / (2q - 1)`, a spectrum that decays like those of smooth functions.
pub fn random_model(rng: &mut impl Rng, m0: usize, m1: usize, basis: BasisConfig) -> EnnModel {
    let mut act = || {
        let values = (0..basis.retained())
            .map(|i| rng.gen_range(-1.0..=1.0) / (2 * i + 1) as f64)
            .collect();
        AdaptiveActivation::new(DctCoefficients::new(values, basis).expect("finite"))
    };
    let hidden: Vec<AdaptiveActivation> = (0..m1).map(|_| act()).collect();
    let output = act();
    Network::from_parts(
        m0,
        m1,
        basis,
        uniform_vec(rng, (m0 + 1) * m1, 1.0),
        hidden,
        uniform_vec(rng, m1 + 1, 1.0),
        output,
    )
    .expect("consistent shapes")
}

fn random_powers(rng: &mut impl Rng) -> PowerEstimates {
    PowerEstimates {
        p0: rng.gen_range(0.5..4.0),
        p1: rng.gen_range(0.5..4.0),
    }
}

fn compare<A>(
    before: &Network<A>,
    after: &Network<A>,
    x: &[f64],
    y: f64,
    steps: &StepSizes,
    trial: usize,
    report: &mut GradCheckReport,
) -> Result<()>
where
    A: crate::activation::Nonlinearity + Clone,
    Network<A>: Parameterized,
{
    for coord in before.coords() {
        let delta = after.param(coord).unwrap() - before.param(coord).unwrap();
        let closed = -delta / step_for(steps, coord);
        let fd = finite_difference_gradient(before, x, y, coord, FD_STEP)?;
        let deviation = relative_deviation(closed, fd);
        report.checked += 1;
        if report
            .worst
            .as_ref()
            .is_none_or(|w| deviation > w.deviation)
        {
            report.worst = Some(Offender {
                trial,
                coord,
                closed_form: closed,
                finite_difference: fd,
                deviation,
            });
        }
        report.max_deviation = report.max_deviation.max(deviation);
    }
    Ok(())
}

/// Signature shared by [`lms_step`] and test doubles.
pub type EnnStepper =
    dyn Fn(&mut EnnModel, &ForwardTrace, f64, &LmsConfig, &mut PowerEstimates) -> Result<StepSizes>;

/// Checks `stepper` on `trials` random (model, sample) draws.
pub fn check_enn_with(seed: u64, trials: usize, stepper: &EnnStepper) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = BasisConfig::default();
    let config = LmsConfig::default();
    let mut report = GradCheckReport {
        trials,
        checked: 0,
        max_deviation: 0.0,
        worst: None,
    };
    for trial in 0..trials {
        let model = random_model(&mut rng, 2, 6, basis);
        let x = uniform_vec(&mut rng, 2, 1.0);
        let y = rng.gen_range(-1.0..=1.0);
        let mut powers = random_powers(&mut rng);
        let trace = model.forward(&x)?;
        let mut updated = model.clone();
        let steps = stepper(&mut updated, &trace, y, &config, &mut powers)?;
        compare(&model, &updated, &x, y, &steps, trial, &mut report)?;
    }
    Ok(report)
}

/// Checks the ENN update rules.
pub fn check_enn(seed: u64, trials: usize) -> Result<GradCheckReport> {
    check_enn_with(seed, trials, &lms_step)
}

/// Checks the linear-only updates of a benchmark model, away from ReLU kinks.
pub fn check_benchmark(
    kind: BenchmarkKind,
    task: TaskKind,
    seed: u64,
    trials: usize,
) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = BasisConfig::default();
    let config = LmsConfig::default();
    let mut report = GradCheckReport {
        trials,
        checked: 0,
        max_deviation: 0.0,
        worst: None,
    };
    let mut trial = 0;
    while trial < trials {
        let mut model: Network<Activation> =
            init_benchmark(kind, task, 2, 6, basis, rng.gen())?.network;
        for k in 0..model.m1() {
            let col = uniform_vec(&mut rng, 3, 1.0);
            model.hidden_column_mut(k).copy_from_slice(&col);
        }
        let out = uniform_vec(&mut rng, model.m1() + 1, 1.0);
        model.output_weights_mut().copy_from_slice(&out);
        let x = uniform_vec(&mut rng, 2, 1.0);
        let y = rng.gen_range(-1.0..=1.0);
        let trace = model.forward(&x)?;
        if trace.z1.iter().any(|z| z.abs() < KINK_MARGIN) {
            continue;
        }
        let mut powers = random_powers(&mut rng);
        let mut updated = model.clone();
        let steps = linear_step(&mut updated, &trace, y, &config, &mut powers)?;
        compare(&model, &updated, &x, y, &steps, trial, &mut report)?;
        trial += 1;
    }
    Ok(report)
}
