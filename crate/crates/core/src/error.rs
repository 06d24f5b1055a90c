use thiserror::Error;

/// Errors produced by the matrix kernels, factorizations and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KrylovError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid matrix structure: {0}")]
    InvalidStructure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("ILU(0) breakdown: pivot {pivot:e} in row {row}")]
    ZeroPivot { row: usize, pivot: f64 },

    #[error("numerically singular Gram matrix (pivot ratio {ratio:e})")]
    SingularGram { ratio: f64 },

    #[error("block {block} of the block-diagonal Gram matrix is not positive definite")]
    NotPositiveDefinite { block: usize },

    #[error("rank-deficient least-squares matrix at column {column}")]
    RankDeficient { column: usize },

    #[error("matrix market: {0}")]
    MatrixMarket(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for KrylovError {
    fn from(e: std::io::Error) -> Self {
        KrylovError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, KrylovError>;
