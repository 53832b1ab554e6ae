use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration failed: trajectory diverged at step {step}")]
    IntegrationFailure { step: usize },

    #[error("signal diverged on all {attempts} attempts")]
    SignalDivergence { attempts: usize },

    #[error("reservoir has zero spectral radius after {attempts} attempts")]
    DegenerateReservoir { attempts: usize },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("NRMSE undefined: target has zero variance")]
    UndefinedNrmse,

    #[error("correlation undefined: constant input")]
    UndefinedCorrelation,

    #[error("sweep cell ({k}, {j}) failed on every trial")]
    CellFailed { k: usize, j: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
