//! Error classes and their exit codes.

use thiserror::Error;

/// Failures that stop a run before a report is complete.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid configuration or input document (exit 2).
    #[error("configuration error: {0}")]
    Parse(String),
    /// A pipeline or the report writer failed (exit 3).
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<beltrami_core::Error> for CliError {
    fn from(e: beltrami_core::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<beltrami_numerics::NumericsError> for CliError {
    fn from(e: beltrami_numerics::NumericsError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
