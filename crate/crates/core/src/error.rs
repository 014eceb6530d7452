use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the decomposition engines and the benchmark harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Input matrix or snapshot carries no usable directions (all zero).
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    /// A snapshot with zero norm cannot seed or extend a basis.
    #[error("degenerate snapshot: {0}")]
    DegenerateSnapshot(&'static str),

    /// Operands with incompatible shapes.
    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    /// NaN or infinity encountered where finite data is required.
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    /// Matrix handed to a symmetric routine is not symmetric.
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e} exceeds {tolerance:.3e})")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    /// Matrix handed to the PSD pseudoinverse has a significantly negative eigenvalue.
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    /// The underlying eigensolver or SVD failed to converge.
    #[error("linear algebra backend failure: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Checkpoint blob could not be parsed or is inconsistent.
    #[error("invalid checkpoint: {0}")]
    InvalidCheckpoint(String),

    /// I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// CSV parse failure, annotated with the path involved.
    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
