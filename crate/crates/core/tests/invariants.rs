mod props;

use enn::analysis::{bump, decision_map, redundancy_report, response_surface};
use enn::gradcheck::random_model;
use enn::io::{grid_to_pgm, parse_pgm, SavedModel};
use enn::{
    accuracy, generate_dataset, init_model, predict_class, AdaptiveActivation, BasisConfig,
    DctCoefficients, Network, Problem, Sample,
};
use props::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cases() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn basis_is_orthonormal_on_grid(b in basis_strategy(), i in 0usize..16, j in 0usize..16) {
        basis_orthonormal(b, i, j)?;
    }

    #[test]
    fn basis_has_period_four(q in 1usize..=6, x in -1.0f64..1.0, s in -3i32..=3) {
        basis_periodic(q, x, s)?;
    }

    #[test]
    fn adaptive_activations_are_odd(seed in any::<u64>(), t in -4.0f64..4.0) {
        activation_odd(seed, t)?;
    }

    #[test]
    fn forward_trace_is_consistent(seed in any::<u64>()) {
        forward_consistent(seed)?;
    }

    #[test]
    fn exact_fit_leaves_model_unchanged(seed in any::<u64>()) {
        zero_error_noop(seed)?;
    }

    #[test]
    fn response_is_weighted_bump_sum(seed in any::<u64>(), r in 2usize..12) {
        bump_decomposition(seed, r)?;
    }

    #[test]
    fn derivative_matches_difference_quotient(seed in any::<u64>(), z in -3.0f64..3.0) {
        derivative_consistent(seed, z)?;
    }

    #[test]
    fn updates_read_pre_update_parameters(seed in any::<u64>(), y in -1.0f64..1.0) {
        synchronous_update(seed, y)?;
    }

    #[test]
    fn negated_model_accuracy_complements(seed in any::<u64>(), p in 0usize..8) {
        let problem = Problem::CLASSIFICATION[p];
        let (model, _, _) = model_from_seed(seed);
        let data = generate_dataset(problem, 200, seed).unwrap();
        // Negating the output coefficients negates y_hat exactly.
        let mut negated = model.clone();
        let coeffs: Vec<f64> = model.output_activation().coeffs().values().iter().map(|f| -f).collect();
        *negated.output_activation_mut() =
            AdaptiveActivation::new(DctCoefficients::new(coeffs, model.basis()).unwrap());
        // y_hat of the negation is -y_hat exactly; skip draws with a zero output.
        let outputs: Vec<f64> = data.iter().map(|s| model.predict(&s.x).unwrap()).collect();
        prop_assume!(outputs.iter().all(|&y| y != 0.0));
        for (s, y) in data.iter().zip(&outputs) {
            prop_assert_eq!(negated.predict(&s.x).unwrap(), -y);
        }
        let total = accuracy(&model, &data).unwrap() + accuracy(&negated, &data).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn labels_match_region_membership(x1 in -1.0f64..=1.0, x2 in -1.0f64..=1.0) {
        let inside = |cx: f64, cy: f64, r: f64| (x1 - cx).powi(2) + (x2 - cy).powi(2) < r * r;
        let rho = (x1 * x1 + x2 * x2).sqrt();
        let in_ring = rho > 0.35 && rho < 0.75;
        let expected = [
            (Problem::Linear, x1 > x2),
            (Problem::Quadratic, x2 > 2.0 * x1 * x1 - 0.5),
            (Problem::Cubic, x2 > 2.5 * x1 * x1 * x1 - x1),
            (Problem::Blob, inside(0.2, 0.1, 0.45)),
            (Problem::TwoCircles, inside(-0.45, -0.45, 0.35) || inside(0.45, 0.45, 0.35)),
            (Problem::Ring, in_ring),
            (Problem::Lines, (1.5 * (x1 - x2)).rem_euclid(2.0) < 1.0),
            (Problem::Face, in_ring || inside(-0.3, 0.25, 0.15) || inside(0.3, 0.25, 0.15)),
        ];
        for (problem, positive) in expected {
            let d = problem.discriminant(&[x1, x2]).unwrap();
            // Points on (or within rounding of) a boundary have no reliable oracle.
            prop_assume!(d.abs() > 1e-9);
            let want = if positive { 1.0 } else { -1.0 };
            prop_assert_eq!(problem.label(&[x1, x2]).unwrap(), want, "{}", problem);
        }
    }

    #[test]
    fn datasets_are_pure_functions_of_their_seed(seed in any::<u64>(), p in 0usize..11) {
        let problem = Problem::CLASSIFICATION.iter().chain(&Problem::REGRESSION).nth(p).copied().unwrap();
        let a = generate_dataset(problem, 50, seed).unwrap();
        prop_assert_eq!(&a, &generate_dataset(problem, 50, seed).unwrap());
        prop_assert!(a.iter().all(|s| s.x.iter().all(|v| (-1.0..=1.0).contains(v))));
    }

    #[test]
    fn decision_map_follows_response_sign(seed in any::<u64>(), r in 2usize..10) {
        let (model, _, _) = model_from_seed(seed);
        let map = decision_map(&model, r).unwrap();
        let resp = response_surface(&model, r).unwrap();
        for (d, y) in map.values().iter().zip(resp.values()) {
            prop_assert_eq!(*d, predict_class(*y));
        }
    }

    #[test]
    fn model_json_round_trips(seed in any::<u64>()) {
        let (model, x, _) = model_from_seed(seed);
        let back = SavedModel::from_json(&SavedModel::Enn(model.clone()).to_json()).unwrap();
        let SavedModel::Enn(back) = back else { panic!("kind changed") };
        prop_assert_eq!(back.predict(&x).unwrap(), model.predict(&x).unwrap());
        prop_assert_eq!(back, model);
    }
}

fn duplicated_neuron_model(second_weight_sign: f64) -> Network<AdaptiveActivation> {
    let basis = BasisConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut model = random_model(&mut rng, 2, 4, basis);
    let col = model.hidden_column(1).to_vec();
    model.hidden_column_mut(3).copy_from_slice(&col);
    let act = model.hidden_activations()[1].clone();
    model.hidden_activations_mut()[3] = act;
    let w = model.output_weights()[2];
    model.output_weights_mut()[4] = 0.7 * second_weight_sign * w;
    model
}

#[test]
fn duplicated_neurons_with_opposed_weights_cancel() {
    let model = duplicated_neuron_model(-1.0);
    let pairs = redundancy_report(&model, 41, 0.01).unwrap();
    let dup: Vec<_> = pairs
        .iter()
        .filter(|p| (p.first, p.second) == (1, 3))
        .collect();
    assert_eq!(dup.len(), 1);
    assert!(dup[0].cancelling);
    assert_eq!(dup[0].weight_sign, -1.0);
    assert!((dup[0].correlation - 1.0).abs() < 1e-12);
}

#[test]
fn duplicated_neurons_with_same_sign_are_not_cancelling() {
    let model = duplicated_neuron_model(1.0);
    let pairs = redundancy_report(&model, 41, 0.01).unwrap();
    let dup = pairs
        .iter()
        .find(|p| (p.first, p.second) == (1, 3))
        .unwrap();
    assert!(!dup.cancelling);
    assert_eq!(dup.weight_sign, 1.0);
}

#[test]
fn random_models_have_no_redundant_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut reported = 0;
    for _ in 0..200 {
        let model = random_model(&mut rng, 2, 6, BasisConfig::default());
        reported += redundancy_report(&model, 31, 0.01).unwrap().len();
    }
    assert_eq!(reported, 0);
}

#[test]
fn asymmetric_fixture_pins_grid_orientation() {
    // P1's label is +1 where x1 > x2: below the diagonal in (row = x1, col = x2).
    let basis = BasisConfig::default();
    let mut f = vec![0.0; basis.retained()];
    f[0] = -1.0;
    let act = AdaptiveActivation::new(DctCoefficients::new(f, basis).unwrap());
    let model = Network::from_parts(
        2,
        1,
        basis,
        vec![0.0, 1.0, -1.0],
        vec![act],
        vec![0.0, 1.0],
        AdaptiveActivation::identity(basis),
    )
    .unwrap();
    let r = 21;
    let map = decision_map(&model, r).unwrap();
    for i in 0..r {
        for j in 0..r {
            let (x1, x2) = (map.coord(i), map.coord(j));
            // The bump is sin(pi/2 (x1 - x2)): its sign is the label for |x1 - x2| < 2.
            if (x1 - x2).abs() > 0.05 && (x1 - x2).abs() < 1.9 {
                let want = Problem::Linear.label(&[x1, x2]).unwrap();
                assert_eq!(map.get(i, j), want, "({x1}, {x2})");
            }
        }
    }
    let pgm = parse_pgm(&grid_to_pgm(&map)).unwrap();
    assert_eq!(pgm.pixels.len(), r * r);
    // Row 0 is x1 = -1; the middle column is x2 = 0.
    assert_eq!(pgm.pixels[r / 2], 0);
    assert_eq!(pgm.pixels[(r - 1) * r + r / 2], 255);
}

#[test]
fn bump_matches_direct_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = random_model(&mut rng, 2, 3, BasisConfig::default());
    let b = bump(&model, 2, 15).unwrap();
    for (x1, x2, v) in b.points() {
        let z = model.hidden_pre_activation(2, &[x1, x2]);
        assert_eq!(
            v,
            enn::Nonlinearity::eval(&model.hidden_activations()[2], z)
        );
    }
}

#[test]
fn stripes_are_balanced_and_accuracy_is_a_fraction() {
    let data: Vec<Sample> = generate_dataset(Problem::Lines, 2000, 5).unwrap();
    let model = init_model(2, 6, BasisConfig::default(), 5).unwrap();
    assert!((0.0..=1.0).contains(&accuracy(&model, &data).unwrap()));
    let positives = data.iter().filter(|s| s.y > 0.0).count() as f64 / data.len() as f64;
    assert!((positives - 0.5).abs() < 0.05, "{positives}");
}
