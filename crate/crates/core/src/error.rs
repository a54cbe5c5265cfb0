use thiserror::Error;

/// Errors raised by model construction and the MTTDL routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("matrix is numerically singular at pivot {pivot}")]
    SingularMatrix { pivot: usize },

    #[error("index {index} out of range (max {max})")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("closed form requires all error rates to be zero (gamma[{index}] = {value})")]
    GammaNotZero { index: usize, value: f64 },

    #[error("xi_{t} is unknown and required because gamma[{}] > 0", t - 1)]
    UnknownXi { t: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid initial distribution: {0}")]
    InvalidDistribution(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("malformed code profile: {0}")]
    MalformedProfile(String),

    #[error("model already carries non-zero error rates")]
    AlreadyHasGamma,

    #[error("rate vector mismatch: {0}")]
    RateVectorMismatch(String),

    #[error("allocation policy mismatch: expected {expected}")]
    PolicyMismatch { expected: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
