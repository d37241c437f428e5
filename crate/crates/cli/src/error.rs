use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        #[source]
        source: shimkit_core::Error,
    },
    #[error("{0}")]
    Empty(String),
    #[error(transparent)]
    Core(#[from] shimkit_core::Error),
}

pub type CliResult<T> = Result<T, CliError>;

/// Successful completion.
pub const EXIT_OK: u8 = 0;
/// Any failure without a more specific code.
pub const EXIT_FAILURE: u8 = 1;
/// Bad arguments, unreadable configuration or malformed input files.
pub const EXIT_USAGE: u8 = 2;
/// The command ran but found nothing (for example zero embeddings).
pub const EXIT_EMPTY: u8 = 3;
/// A search or enumeration budget was exhausted.
pub const EXIT_BUDGET: u8 = 4;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use shimkit_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Json { .. } | CliError::Model { .. } => EXIT_USAGE,
            CliError::Empty(_) => EXIT_EMPTY,
            CliError::Core(E::BudgetExceeded(_) | E::TooLarge(..)) => EXIT_BUDGET,
            CliError::Core(E::Parse { .. }) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Core(_) => EXIT_FAILURE,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
