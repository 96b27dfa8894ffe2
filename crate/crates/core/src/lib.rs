//! Expressive neural networks: two-layer perceptrons whose activation
//! functions are truncated DCT series, trained together with the linear
//! weights by sample-wise LMS.
//!
//! - [`dct`]: cosine basis, analysis/synthesis, truncation tail
//! - [`activation`]: adaptive and fixed nonlinearities
//! - [`network`]: the model, forward pass and initialization
//! - [`training`]: closed-form LMS updates and the gradient oracle
//! - [`tasks`]: synthetic problems and metrics
//! - [`analysis`]: bumps, decision maps and redundancy detection
//! - [`io`]: JSON, CSV and PGM formats

pub mod activation;
pub mod analysis;
pub mod dct;
pub mod error;
pub mod gradcheck;
pub mod io;
pub mod network;
pub mod tasks;
pub mod training;

pub use activation::{
    identity_init, sigmoid_dct_init, Activation, AdaptiveActivation, FixedActivation, Nonlinearity,
};
pub use dct::{
    analyze, cos_basis, sin_basis, synthesize, truncation_tail, BasisConfig, DctCoefficients,
};
pub use error::{EnnError, Result};
pub use network::{
    init_benchmark, init_model, predict_class, BenchmarkKind, BenchmarkModel, EnnModel,
    ForwardTrace, Network,
};
pub use tasks::{accuracy, generate_dataset, mse, Problem, Sample, TaskKind};
pub use training::{
    finite_difference_gradient, lms_step, train, train_benchmark, LmsConfig, ParamCoord,
    PowerEstimates, StepSizes, TrainError, TrainReport,
};
