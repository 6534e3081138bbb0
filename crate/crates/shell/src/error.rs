use std::path::{Path, PathBuf};

use cogrisk_core::SimError;
use cogrisk_neural::NnError;
use cogrisk_sac::SacError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShellError {
    /// Bad input: malformed files, out-of-range values, inconsistent options.
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Failure while running an otherwise valid request.
    #[error("{0}")]
    Runtime(String),
}

pub type Result<T> = std::result::Result<T, ShellError>;

impl ShellError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        ShellError::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: impl std::fmt::Display, message: impl Into<String>) -> Self {
        ShellError::Parse { path: path.to_string(), message: message.into() }
    }

    /// Process exit code: 1 for invalid input, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ShellError::Validation(_) | ShellError::Parse { .. } => 1,
            ShellError::Io { .. } | ShellError::Runtime(_) => 2,
        }
    }
}

impl From<SimError> for ShellError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Validation(m) => ShellError::Validation(m),
            SimError::Contract(m) => ShellError::Runtime(m),
        }
    }
}

impl From<NnError> for ShellError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::Checkpoint(m) => ShellError::Validation(format!("checkpoint: {m}")),
            other => ShellError::Runtime(other.to_string()),
        }
    }
}

impl From<SacError> for ShellError {
    fn from(e: SacError) -> Self {
        match e {
            SacError::Sim(s) => s.into(),
            SacError::Nn(n) => n.into(),
            SacError::Config(m) => ShellError::Validation(m),
            other => ShellError::Runtime(other.to_string()),
        }
    }
}
