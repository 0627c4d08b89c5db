use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its admissibility constraint.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument lies outside the domain the routine supports.
    #[error("argument outside supported domain: {0}")]
    Domain(String),

    #[error("series did not converge within {terms} terms (last term magnitude {last_term:e})")]
    Convergence { terms: usize, last_term: f64 },

    /// Cancellation error estimate exceeds the requested tolerance even at
    /// the highest permitted working precision.
    #[error("precision loss: estimated error {estimated_error:e} exceeds tolerance for value {value:e}")]
    PrecisionLoss { estimated_error: f64, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("quadrature failed: {0}")]
    Integration(String),

    #[error("range error: {0}")]
    Range(String),

    /// Skewness or kurtosis requested for a distribution with zero variance.
    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Asymptotic series whose first terms already grow.
    #[error("asymptotic series invalid at this argument: {0}")]
    AsymptoticInvalid(String),
}

impl Error {
    /// True for errors caused by the caller's arguments rather than by the
    /// numerics (the CLI maps these to exit code 2).
    pub fn is_argument_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::Unsupported(_) | Error::InsufficientData { .. }
        )
    }
}
