use thiserror::Error;

/// Errors produced by the tomography pipeline.
#[derive(Debug, Error)]
pub enum TomoError {
    #[error("state is not normalized: sum of |amplitude|^2 = {norm}")]
    NotNormalized { norm: f64 },

    #[error("matrix is not Hermitian: |entry[{j}][{k}] - conj(entry[{k}][{j}])| = {dev}")]
    NotHermitian { j: usize, k: usize, dev: f64 },

    #[error("matrix is not square: {rows} rows, row {row} has {cols} columns")]
    NotSquare { rows: usize, row: usize, cols: usize },

    #[error("invalid grid parameter: {0}")]
    InvalidGrid(String),

    #[error("record does not match the expected grid: {0}")]
    GridMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient polynomial order: {0}")]
    InsufficientOrder(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TomoError>;
