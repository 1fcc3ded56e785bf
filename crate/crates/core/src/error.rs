use thiserror::Error;

/// Errors produced by the solver and diagnostics layers.
///
/// Blowup is deliberately *not* an error: the time stepper reports it through
/// [`crate::evolution::BlowupReport`] so a blowing-up run is a normal outcome.
#[derive(Debug, Error)]
pub enum KgError {
    /// Caller violated a precondition (shape mismatch, bad parameter, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// An iterative solver failed to converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A state contained NaN/Inf where a finite field was required.
    #[error("non-finite field data: {0}")]
    NonFinite(String),

    /// Internal consistency check failed.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, KgError>;

impl KgError {
    pub fn usage(msg: impl Into<String>) -> Self {
        KgError::Usage(msg.into())
    }
}
