use thiserror::Error;

/// Errors raised while reading delimiter-separated input.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DsvError {
    #[error("input file is empty")]
    Empty,
    #[error("row {row}: expected {expected} columns, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column}: cannot parse {cell:?} as a number")]
    NonNumeric {
        row: usize,
        column: usize,
        cell: String,
    },
    #[error("row {row}, column {column}: missing value")]
    Missing { row: usize, column: usize },
    #[error("label column {0:?} not found in header")]
    UnknownLabelColumn(String),
    #[error("label column index {index} out of range for {columns} columns")]
    LabelColumnOutOfRange { index: usize, columns: usize },
    #[error("malformed input: {0}")]
    Malformed(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Dsv(#[from] DsvError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("data has zero total variance")]
    ZeroVariance,
    #[error("data is rank deficient: {0}")]
    RankDeficient(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("operation not applicable: {0}")]
    Inapplicable(String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("trajectory blew up at t = {time}")]
    BlowUp { time: f64 },
    #[error("no limit cycle found: {0}")]
    CycleNotFound(String),
    #[error("linear solver did not converge: {0}")]
    NoConvergence(String),
}

impl Error {
    /// True for failures caused by bad input or configuration rather than
    /// by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Dsv(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::InvalidInput(_)
                | Error::DimensionMismatch(_)
                | Error::Inapplicable(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
