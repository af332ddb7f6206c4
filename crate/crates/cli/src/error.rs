//! Error classification for process exit codes.

use thiserror::Error;

/// Exit code 1 for anything wrong with the inputs, 2 for a broken
/// internal invariant.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal invariant failure: {0}")]
    Internal(String),
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
