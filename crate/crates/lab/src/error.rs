use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("malformed {what} in {path}: {message}")]
    Format { what: &'static str, path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] onesided_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

impl LabError {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Config { path: path.into(), message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for configuration and resource problems, 1 for
    /// everything that went wrong while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config { .. } | LabError::Resource(_) | LabError::Format { .. } => 2,
            _ => 1,
        }
    }
}
