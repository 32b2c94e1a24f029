use thiserror::Error;

/// Failure of an adaptive quadrature, carrying the subinterval with the
/// largest remaining error estimate.
#[derive(Debug, Clone, PartialEq, Error)]
#[error(
    "quadrature did not converge: estimate {value:e} with error {error:e} > target {target:e}; \
     worst subinterval [{worst_lo}, {worst_hi}] (error {worst_error:e}) after {intervals} intervals"
)]
pub struct QuadratureError {
    pub value: f64,
    pub error: f64,
    pub target: f64,
    pub worst_lo: f64,
    pub worst_hi: f64,
    pub worst_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Validation-type errors map to CLI exit code 2, numerical ones to 3.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid { .. } | Error::Precondition(_) | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
