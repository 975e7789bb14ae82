use thiserror::Error;
use vpl_core::Error as CoreError;

/// Failures of a command, each mapped to a distinct process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("internal error: {0}")]
    Internal(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Internal(_) => 1,
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Validation(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_) | CoreError::AsymmetricGrid => Self::Config(e.to_string()),
            CoreError::Io(_) => Self::Internal(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Internal(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
