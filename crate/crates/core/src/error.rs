use thiserror::Error;

/// Errors produced by the PUF model, encoders, metrics and attack code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs that must be aligned (same length, same width) were not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A configuration that cannot produce a valid result.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input that is well-formed but statistically degenerate, e.g. a
    /// constant sequence handed to the autocorrelation estimator.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at step {step}: loss = {loss}")]
    Divergence { step: usize, loss: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
