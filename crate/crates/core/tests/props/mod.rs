//! Randomized invariants shared by the property suite and the acceptance runner.
//! Each check takes plain seeds/values so it can be driven by `proptest!` or by
//! a bare `TestRunner`.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use enn::analysis::{bump, response_surface};
use enn::gradcheck::random_model;
use enn::training::Parameterized;
use enn::{
    cos_basis, lms_step, sin_basis, BasisConfig, EnnModel, LmsConfig, Nonlinearity, PowerEstimates,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), TestCaseError>;

pub const CASES: u32 = 1000;

pub fn model_from_seed(seed: u64) -> (EnnModel, Vec<f64>, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m1 = rng.gen_range(1..=8);
    let model = random_model(&mut rng, 2, m1, BasisConfig::default());
    let x = vec![rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
    (model, x, rng)
}

pub fn basis_strategy() -> impl Strategy<Value = BasisConfig> {
    (1usize..=16, 0usize..=3).prop_map(|(half_q, extra)| {
        let q = 2 * half_q;
        BasisConfig::new(q.next_power_of_two() << extra, q).unwrap()
    })
}

/// Discrete orthonormality of two retained basis vectors on the DCT grid.
pub fn basis_orthonormal(basis: BasisConfig, i: usize, j: usize) -> Check {
    let r = basis.retained();
    let (i, j) = (1 + i % r, 1 + j % r);
    let n = basis.grid_len();
    let dot: f64 = basis
        .grid()
        .iter()
        .map(|&x| cos_basis(i, x, n) * cos_basis(j, x, n))
        .sum::<f64>()
        * 2.0
        / n as f64;
    let expected = if i == j { 1.0 } else { 0.0 };
    prop_assert!((dot - expected).abs() < 1e-10, "<{i},{j}> = {dot} on N={n}");
    Ok(())
}

/// Period 4 in `x` for both basis families.
pub fn basis_periodic(q: usize, x: f64, shift: i32) -> Check {
    let n = 512;
    let xs = x + 4.0 * shift as f64;
    let tol = 1e-9 * (1.0 + xs.abs());
    prop_assert!((cos_basis(q, x, n) - cos_basis(q, xs, n)).abs() < tol);
    prop_assert!((sin_basis(q, x, n) - sin_basis(q, xs, n)).abs() < tol);
    Ok(())
}

/// Every adaptive activation is odd about `-1/N`, hence odd about 0 up to a
/// shift of `2/N`.
pub fn activation_odd(seed: u64, t: f64) -> Check {
    let (model, _, _) = model_from_seed(seed);
    let basis = model.basis();
    let c = basis.symmetry_center();
    let acts = model
        .hidden_activations()
        .iter()
        .chain(std::iter::once(model.output_activation()));
    for act in acts {
        let scale = 1.0 + act.coeffs().l1_norm();
        let (up, down) = (act.eval(c + t), act.eval(c - t));
        prop_assert!(
            (up + down).abs() <= 1e-12 * scale,
            "f(c+t)={up}, f(c-t)={down}"
        );
        let bound: f64 = PI / basis.grid_len() as f64
            * act
                .coeffs()
                .values()
                .iter()
                .enumerate()
                .map(|(i, f)| f.abs() * (2 * i + 1) as f64)
                .sum::<f64>();
        let gap = (act.eval(t) + act.eval(-t)).abs();
        prop_assert!(gap <= bound + 1e-12 * scale, "f(t)+f(-t)={gap} > {bound}");
    }
    Ok(())
}

/// The trace is the composition it claims to be.
pub fn forward_consistent(seed: u64) -> Check {
    let (model, x, _) = model_from_seed(seed);
    let t = model.forward(&x).unwrap();
    prop_assert_eq!(&t.s0, &vec![1.0, x[0], x[1]]);
    prop_assert_eq!(t.z1.len(), model.m1());
    prop_assert_eq!(t.s1[0], 1.0);
    for k in 0..model.m1() {
        let col = model.hidden_column(k);
        let z = col[0] + col[1] * x[0] + col[2] * x[1];
        prop_assert!((t.z1[k] - z).abs() <= 1e-14 * (1.0 + z.abs()));
        prop_assert_eq!(t.s1[k + 1], model.hidden_activations()[k].eval(t.z1[k]));
    }
    let z2: f64 = model
        .output_weights()
        .iter()
        .zip(&t.s1)
        .map(|(a, s)| a * s)
        .sum();
    prop_assert!((t.z2 - z2).abs() <= 1e-13 * (1.0 + z2.abs()));
    prop_assert_eq!(t.y_hat, model.output_activation().eval(t.z2));
    prop_assert_eq!(model.predict(&x).unwrap(), t.y_hat);
    Ok(())
}

/// A sample the model already fits exactly changes no parameter.
pub fn zero_error_noop(seed: u64) -> Check {
    let (model, x, mut rng) = model_from_seed(seed);
    let t = model.forward(&x).unwrap();
    let mut updated = model.clone();
    let mut powers = PowerEstimates {
        p0: rng.gen_range(0.5..4.0),
        p1: rng.gen_range(0.5..4.0),
    };
    lms_step(
        &mut updated,
        &t,
        t.y_hat,
        &LmsConfig::default(),
        &mut powers,
    )
    .unwrap();
    for c in model.coords() {
        prop_assert_eq!(model.param(c), updated.param(c), "{:?} moved", c);
    }
    Ok(())
}

/// `response == output_act(a_2[0] + sum_k a_2[k] bump_k)` at every grid point.
pub fn bump_decomposition(seed: u64, resolution: usize) -> Check {
    let (model, _, _) = model_from_seed(seed);
    let bumps: Vec<_> = (0..model.m1())
        .map(|k| bump(&model, k, resolution).unwrap())
        .collect();
    let resp = response_surface(&model, resolution).unwrap();
    let a = model.output_weights();
    for idx in 0..resolution * resolution {
        let z2 = a[0]
            + bumps
                .iter()
                .enumerate()
                .map(|(k, b)| a[k + 1] * b.values()[idx])
                .sum::<f64>();
        let expected = model.output_activation().eval(z2);
        let got = resp.values()[idx];
        prop_assert!(
            (got - expected).abs() <= 1e-12 * (1.0 + expected.abs()),
            "{got} vs {expected}"
        );
    }
    Ok(())
}

/// Analytic derivative against a central difference.
pub fn derivative_consistent(seed: u64, z: f64) -> Check {
    let (model, _, _) = model_from_seed(seed);
    let act = model.output_activation();
    let h = 1e-5;
    let fd = (act.eval(z + h) - act.eval(z - h)) / (2.0 * h);
    let d = act.derivative(z);
    prop_assert!(
        (d - fd).abs() <= 1e-6 * (1.0 + act.coeffs().l1_norm() * 100.0),
        "{d} vs {fd}"
    );
    Ok(())
}

/// All deltas are computed from the pre-update parameters: the hidden DCT
/// step uses the old output weight and old output activation.
pub fn synchronous_update(seed: u64, y: f64) -> Check {
    let (model, x, _) = model_from_seed(seed);
    let t = model.forward(&x).unwrap();
    let mut updated = model.clone();
    let mut powers = PowerEstimates::initial(2, model.basis());
    let steps = lms_step(&mut updated, &t, y, &LmsConfig::default(), &mut powers).unwrap();
    let eps = y - t.y_hat;
    let n = model.basis().grid_len();
    let out_sine = model.output_activation().coeffs().weighted_sine_sum(t.z2);
    for k in 0..model.m1() {
        let a2k = model.output_weights()[k + 1];
        let old = model.hidden_activations()[k].coeffs().values();
        let new = updated.hidden_activations()[k].coeffs().values();
        for i in 0..old.len() {
            let delta =
                -steps.hidden_dct * eps * FRAC_PI_2 * a2k * cos_basis(i + 1, t.z1[k], n) * out_sine;
            prop_assert!((new[i] - old[i] - delta).abs() <= 1e-15 + 1e-12 * delta.abs());
        }
    }
    Ok(())
}

fn run<S: Strategy>(
    name: &str,
    strategy: S,
    check: impl Fn(S::Value) -> Check,
) -> (String, Result<u32, String>)
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    let outcome = runner
        .run(&strategy, check)
        .map(|_| CASES)
        .map_err(|e| e.to_string());
    (name.to_string(), outcome)
}

/// The named invariant suites, `CASES` cases each.
pub fn run_named_suites() -> Vec<(String, Result<u32, String>)> {
    vec![
        run(
            "basis orthonormality",
            (basis_strategy(), 0usize..16, 0usize..16),
            |(b, i, j)| basis_orthonormal(b, i, j),
        ),
        run(
            "basis periodicity",
            (1usize..=6, -1.0f64..1.0, -3i32..=3),
            |(q, x, s)| basis_periodic(q, x, s),
        ),
        run("odd symmetry", (any::<u64>(), -4.0f64..4.0), |(s, t)| {
            activation_odd(s, t)
        }),
        run(
            "forward-trace consistency",
            any::<u64>(),
            forward_consistent,
        ),
        run("zero-error no-op", any::<u64>(), zero_error_noop),
        run(
            "bump/response decomposition",
            (any::<u64>(), 2usize..12),
            |(s, r)| bump_decomposition(s, r),
        ),
    ]
}
