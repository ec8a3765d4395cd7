use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} spins, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("spin index {index} out of range for {n} spins")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("spin index {0} listed more than once")]
    DuplicateIndex(usize),

    #[error("empty flip set")]
    EmptyFlipSet,

    #[error("invalid spin value {0}, expected -1 or +1")]
    InvalidSpin(i8),

    #[error("state label {label} out of range for {n} spins")]
    LabelOutOfRange { label: u64, n: usize },

    #[error("invalid coupling ({i}, {j}): {reason}")]
    InvalidCoupling { i: usize, j: usize, reason: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{n} spins exceeds the enumeration cap of {cap}")]
    Capacity { n: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
