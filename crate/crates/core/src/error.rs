use thiserror::Error;

/// Errors raised by the model, training and export layers.
#[derive(Debug, Error)]
pub enum EnnError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("operation requires a classification dataset")]
    NotClassification,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = EnnError> = std::result::Result<T, E>;
