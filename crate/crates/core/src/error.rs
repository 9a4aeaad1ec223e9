use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("enumeration of {size} assignments exceeds the cap of {cap}")]
    CapExceeded { size: f64, cap: u64 },

    #[error("{sniffers} sniffers exceed the binary ICA cap of {cap}")]
    TooManySniffers { sniffers: usize, cap: usize },

    #[error("users {first} and {second} have identical coverage columns")]
    DuplicateColumns { first: usize, second: usize },

    #[error("the all-idle observation pattern was never seen")]
    NoIdlePattern,

    #[error("missing trace for channel {0}")]
    MissingChannel(usize),

    #[error("rank-deficient covariance: {rank} independent directions, {requested} requested")]
    RankDeficient { rank: usize, requested: usize },

    #[error("could not satisfy generator constraints after {0} attempts")]
    RetriesExhausted(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed trace file: {0}")]
    TraceFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that stem from numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::NoIdlePattern | Error::RankDeficient { .. }
        )
    }
}
