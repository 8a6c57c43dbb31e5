use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulator, trainer, and data pipeline.
#[derive(Debug, Error)]
pub enum QnnError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("qubit index {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("dimension mismatch ({what}): expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not unitary: max |U^dagger U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("training aborted at iteration {iteration}: {reason}")]
    Aborted { iteration: usize, reason: String },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, QnnError>;

impl QnnError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        QnnError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        QnnError::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
