//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An item that is constant across all rows carries no information and
    /// makes its parameters unidentifiable.
    #[error("degenerate item {item_id:?}: {details}")]
    DegenerateItem { item_id: String, details: String },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    /// Malformed response cell, 1-based row/column within the CSV body.
    #[error(
        "row {row}, column {column}: invalid cell {found:?} (expected \"0\", \"1\", or empty)"
    )]
    InvalidCell {
        row: usize,
        column: usize,
        found: String,
    },

    #[error("duplicate identifier {0:?}")]
    DuplicateId(String),

    #[error("unknown service {0:?}")]
    UnknownService(String),

    #[error("unknown product {0:?}")]
    UnknownProduct(String),

    #[error("incomplete mesh: missing stats for member service {service_id:?}")]
    IncompleteMesh { service_id: String },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("incompatible format tag {found:?} (expected {expected:?})")]
    FormatVersion { found: String, expected: String },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse classification used by callers that map errors to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed, inconsistent, or insufficient input data.
    Data,
    /// A numerical procedure failed or is undefined for the inputs.
    Numerical,
}

impl Error {
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn insufficient_data(msg: impl Into<String>) -> Self {
        Error::InsufficientData(msg.into())
    }

    pub fn schema_mismatch(msg: impl Into<String>) -> Self {
        Error::SchemaMismatch(msg.into())
    }

    pub fn out_of_range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn degenerate_item(item_id: impl Into<String>, details: impl Into<String>) -> Self {
        Error::DegenerateItem {
            item_id: item_id.into(),
            details: details.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Numerical(_) | Error::UndefinedCorrelation(_) => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }
}
