use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: {requested} exceeds cap {cap}")]
    CapExceeded { what: &'static str, requested: u128, cap: u128 },

    /// Iterated products stopped early; `reached` is the largest completed power.
    #[error("iterated product set exceeded cap {cap} after n = {reached}")]
    IterationCapExceeded { reached: usize, cap: u128 },

    #[error("integer magnitude of {bits} bits exceeds the {cap_bits}-bit cap")]
    MagnitudeCap { bits: u64, cap_bits: u32 },

    #[error("zero has no inverse")]
    InverseOfZero,

    #[error("{0} is not a unit in the integers")]
    NonUnit(String),

    #[error("invalid modulus {0}: must be an odd prime below 2^63")]
    InvalidModulus(u64),

    #[error("invalid cube spec: {0}")]
    InvalidSpec(String),

    #[error("operation requires {expected} mode")]
    ModeMismatch { expected: &'static str },

    #[error("digit set is not an interval {{0..h}}")]
    NonIntervalDigits,

    #[error("index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("parameter domain violated: {0}")]
    Domain(String),

    #[error("zero divisor encountered")]
    ZeroDivisor,

    #[error("set mismatch: {0}")]
    NotSubset(String),

    #[error("element from a different ring")]
    RingMismatch,

    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. } | Error::IterationCapExceeded { .. } | Error::MagnitudeCap { .. })
    }
}
