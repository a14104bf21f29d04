use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid parameter space: {0}")]
    InvalidSpace(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("population too small: need at least {needed} members, have {have}")]
    PopulationTooSmall { needed: usize, have: usize },

    #[error("degenerate model: output variance is zero for metric `{metric}` on `{problem}`")]
    DegenerateModel { metric: String, problem: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("store is corrupt: {0}")]
    CorruptStore(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
