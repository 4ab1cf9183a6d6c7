use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Failure categories of a run; each maps to one process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("regime failure: {0}")]
    Regime(String),

    #[error("analysis precondition failed: {0}")]
    Analysis(String),

    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io { .. } => 1,
            Self::Regime(_) => 2,
            Self::Analysis(_) => 3,
            Self::Solver(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Classifies a library error raised while deriving device parameters.
    pub fn from_derive(e: nanofock::Error) -> Self {
        match e {
            nanofock::Error::InvalidArgument(_) => Self::Config(e.to_string()),
            nanofock::Error::Buckling { .. } => Self::Regime(e.to_string()),
            _ => Self::Solver(e.to_string()),
        }
    }

    /// Classifies a library error raised by a solve or time evolution.
    pub fn from_solver(e: nanofock::Error) -> Self {
        match e {
            nanofock::Error::InvalidArgument(_) => Self::Config(e.to_string()),
            nanofock::Error::Unresolved { .. } => Self::Analysis(e.to_string()),
            _ => Self::Solver(e.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
