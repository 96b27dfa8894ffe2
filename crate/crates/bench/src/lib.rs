//! Fixtures shared by the throughput benchmarks.

use enn::{generate_dataset, init_model, BasisConfig, EnnModel, Problem, Sample};

/// The reference ENN (M1 = 6, N = 512, Q = 12) before training.
pub fn reference_model() -> EnnModel {
    init_model(2, 6, BasisConfig::default(), 3).expect("valid reference shape")
}

/// `n` samples of the stripes task.
pub fn stripes(n: usize) -> Vec<Sample> {
    generate_dataset(Problem::Lines, n, 1).expect("n > 0")
}
