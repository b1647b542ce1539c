use std::io;

use splitel_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, config entries or model parameters.
    #[error("invalid specification: {0}")]
    Spec(String),
    /// Unreadable or malformed input, or data a method cannot handle.
    #[error("data error: {0}")]
    Data(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidSpec(_) | CoreError::Domain(_) | CoreError::ZeroDirection => {
                CliError::Spec(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
