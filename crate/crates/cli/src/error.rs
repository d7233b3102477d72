use std::path::Path;

use thiserror::Error;

/// Command failures, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or configuration, or an output that cannot be written.
    #[error("{0}")]
    Usage(String),

    /// Input data that is missing, malformed, inconsistent or degenerate.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub(crate) fn write(path: &Path, e: std::io::Error) -> Self {
        CliError::Usage(format!("cannot write {}: {e}", path.display()))
    }

    pub(crate) fn read(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("cannot read {}: {e}", path.display()))
    }

    /// Core errors raised while validating arguments.
    pub(crate) fn from_config(e: ppuf_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }

    /// Core errors raised while processing input data.
    pub(crate) fn from_data(e: ppuf_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
