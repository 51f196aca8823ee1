use std::path::Path;

use nhpc_core::NhError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numeric(#[from] NhError),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("verification failed: {0} check(s) out of tolerance")]
    Verify(usize),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numeric(_) => 2,
            CliError::Verify(_) => 3,
        }
    }
}
