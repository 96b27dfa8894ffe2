//! Experiment runner behind the `enn` binary: configuration, training cells,
//! result tables and analysis exports.

pub mod commands;
pub mod config;
pub mod run;

pub use config::{ExperimentConfig, ModelKind, Scale, Seeds};
pub use run::{run_cell, CellFailure, CellResult, Metric};
