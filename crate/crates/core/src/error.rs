use thiserror::Error;

/// Errors produced by the GWJ library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GwjError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input: a bad spec string, option value or theorem id.
    #[error("parse error: {0}")]
    Parse(String),

    /// Adaptive quadrature failed to reach the requested tolerance; this is
    /// how divergent integrals surface.
    #[error("integration error: {reason} (estimate {estimate:e}, error {abs_error:e})")]
    Integration {
        reason: String,
        estimate: f64,
        abs_error: f64,
    },

    /// A value that should be finite overflowed.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Monte Carlo estimation could not produce a trustworthy estimate.
    #[error("estimation error: {0}")]
    Estimation(String),
}

impl GwjError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        GwjError::Domain(msg.into())
    }

    /// True for errors caused by bad input text rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(self, GwjError::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, GwjError>;
