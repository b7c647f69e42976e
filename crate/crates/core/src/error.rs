use thiserror::Error;

/// Failures raised by kernel construction, model fitting and experiment validation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("temperature must be finite and positive, got {0}")]
    InvalidTemperature(f64),

    #[error("dataset mismatch: {0}")]
    DataMismatch(String),

    #[error("not enough observations: need at least {needed}, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    #[error("prior is improper; no prior predictive exists")]
    ImproperPrior,

    #[error("kernels live on incompatible supports")]
    IncompatibleSupport,

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("incompatible experiment: {0}")]
    Incompatible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
