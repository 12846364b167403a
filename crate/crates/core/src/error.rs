use thiserror::Error;

/// Errors raised across the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("moment degree {requested} exceeds table capacity {capacity}")]
    Capacity { requested: usize, capacity: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("step rejected: {0}")]
    StepRejected(String),

    #[error("stability error: {0}")]
    Stability(String),

    #[error("normalization loss: {lost:.3e} of the mass lies outside the m-box")]
    NormalizationLoss { lost: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
