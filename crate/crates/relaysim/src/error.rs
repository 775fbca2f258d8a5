//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by simulation, sampling, detection and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its valid range (non-positive variance,
    /// probabilities that do not sum to one, mismatched dimensions, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Not enough data to compute the requested quantity.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A numeric operation left its domain (non-finite relay output,
    /// singular covariance after regularization, zero-variance series).
    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    /// An exhaustive search was asked to enumerate too many codewords.
    #[error("search space too large: {0}")]
    SearchSpaceTooLarge(String),

    /// A configuration document failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed JSON input.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Shorthand for an [`Error::InvalidParameter`] with a formatted message.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
