use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("infeasible constraint: {0}")]
    InfeasibleConstraint(String),

    /// The graph has a chordless cycle of length at least four.
    #[error("graph is not chordal: chordless cycle {cycle:?}")]
    NotChordal { cycle: Vec<usize> },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
