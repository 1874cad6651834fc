use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user input or configuration (unknown pair, bad mask, zero epochs, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data that is structurally valid but unusable.
    #[error("data error: {0}")]
    Data(String),

    #[error("schema error in {path}: column `{column}` {problem}")]
    Schema {
        path: PathBuf,
        column: String,
        problem: String,
    },

    #[error("shape mismatch in {op}: expected {expected:?}, got {actual:?}")]
    Shape {
        op: &'static str,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    /// Network or endpoint failure that survived the retry budget.
    #[error("request to {url} failed after {attempts} attempt(s): {reason}")]
    Retryable {
        url: String,
        attempts: u32,
        reason: String,
    },

    #[error("training diverged at epoch {epoch}, batch {batch}: {detail}")]
    Divergence {
        epoch: usize,
        batch: usize,
        detail: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Divergence { .. } => 4,
            _ => 3,
        }
    }

    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Retryable { .. })
    }
}
