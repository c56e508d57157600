use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Every variant maps onto CLI exit code 3 except [`Error::Usage`] (2).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole of the Gamma function at {0}")]
    GammaPole(String),

    #[error("hypergeometric parameter c = {0} is a nonpositive integer")]
    ParameterPole(String),

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("no positive bounded boundary solution: t = {t} exceeds 3(4+κ)²/(32κ) = {limit}")]
    ConditionViolated { t: f64, limit: f64 },

    #[error("step error: {0}")]
    StepSize(String),

    #[error("overflow: log-moment {0} exceeds the representable range")]
    Overflow(f64),

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("at least {needed} scales required, got {got}")]
    InsufficientScales { needed: usize, got: usize },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
