use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Failures of one invocation, each mapped to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Compute(#[from] gibbsent::Error),

    #[error("verdict is undecided")]
    Undecided,

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Compute(gibbsent::Error::Budget { .. }) => 3,
            CliError::Compute(_) => 2,
            CliError::Undecided => 4,
            CliError::Read { .. } | CliError::Write { .. } | CliError::Failed(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
