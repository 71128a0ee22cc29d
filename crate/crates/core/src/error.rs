use thiserror::Error;

/// Errors raised by ingest, training, inference and model persistence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("missing value at row {row}, column {column}")]
    MissingValue { row: usize, column: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("at least two categories are required, found {0}")]
    TooFewCategories(usize),

    #[error("duplicate category label {0:?}")]
    DuplicateLabel(String),

    #[error("label {0:?} is not a known category")]
    UnknownLabel(String),

    #[error("value {value:?} in nominal column {column} was not seen during training")]
    UnknownNominal { column: usize, value: String },

    #[error("category index {0} is out of range")]
    CategoryOutOfRange(usize),

    #[error("category {0:?} has no rows")]
    EmptyCategory(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("correction value {0} is not a finite non-negative number")]
    InvalidCorrection(f64),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid training config: {0}")]
    Config(String),

    #[error("invalid model file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
