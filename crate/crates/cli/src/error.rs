use std::io;

use thiserror::Error;

/// Failure of a command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config values or parameters. Exit code 1.
    #[error("{0}")]
    Validation(String),
    /// A numerical procedure failed on valid inputs. Exit code 2.
    #[error("{0}")]
    Numerical(String),
    /// I/O or serialization trouble. Exit code 3.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<sisfront::Error> for CliError {
    fn from(e: sisfront::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
