//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    #[error("{0}")]
    Validation(String),
    /// The experiment config file is malformed or semantically invalid.
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
    /// Training loss stopped being finite.
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    /// A stored artifact (checkpoint, CSV, report) failed to parse.
    #[error("{path}: {message}")]
    Artifact { path: String, message: String },
    /// An output file already exists with different contents.
    #[error("refusing to overwrite {0}: contents differ (pass --force to replace)")]
    WouldOverwrite(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 for config errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            _ => 1,
        }
    }
}
