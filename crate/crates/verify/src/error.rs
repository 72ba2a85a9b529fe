use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("config: {0}")]
    Config(String),

    #[error("unknown suite `{0}` (try `verify list`)")]
    UnknownSuite(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("fit: {0}")]
    Fit(String),
}

impl VerifyError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        VerifyError::Config(msg.into())
    }

    /// Process exit code for errors that stop a run before any report exists.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub type Result<T> = std::result::Result<T, VerifyError>;
