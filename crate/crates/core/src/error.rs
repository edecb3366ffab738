use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynopsisError {
    #[error("signal length {len} is not a power of two (n >= 2 required, no implicit padding)")]
    NotPowerOfTwo { len: usize },

    #[error("input is empty")]
    Empty,

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("weight at position {index} is {value}; weights must be finite and > 0")]
    InvalidWeight { index: usize, value: f64 },

    #[error("value at position {index} is not finite")]
    NonFinite { index: usize },

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("bucket [{start}, {end}) is empty or outside the series")]
    InvalidBucket { start: usize, end: usize },

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("epsilon must be finite and > 0, got {0}")]
    InvalidEpsilon(f64),

    #[error("value grid has {count} points, above the cap of {cap}; raise epsilon or the grid cap")]
    GridTooLarge { count: usize, cap: usize },

    #[error("instance too large for {what}: {detail}")]
    InstanceTooLarge { what: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, SynopsisError>;
