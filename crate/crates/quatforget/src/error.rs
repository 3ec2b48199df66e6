use thiserror::Error;

/// Errors raised by the library.
///
/// `Domain` covers precondition violations (zero inputs, mismatched
/// algebras, non-orders where an order is required). `NotWithinBound`
/// is the explicit "search exhausted" outcome for bounded witness
/// searches and is distinct from a proof of nonexistence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("not found within search bound {0}")]
    NotWithinBound(i64),

    #[error("maximal order saturation failed: {0}")]
    SaturationFailed(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("numerically indeterminate: {0}")]
    Indeterminate(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
