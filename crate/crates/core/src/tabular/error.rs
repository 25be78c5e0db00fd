use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TabularError {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    /// Rows are numbered from 0 in data order (the header is not counted).
    #[error("row {row}: value {value} for `{feature}` is out of range")]
    OutOfRangeValue {
        row: usize,
        feature: String,
        value: f64,
    },

    #[error("row {row}: `{feature}` must be an integer level, got {value}")]
    NonIntegerOrdinal {
        row: usize,
        feature: String,
        value: f64,
    },

    #[error("row {row}: malformed row: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("instance has {actual} values but the schema has {expected} features")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("encoded slice for `{0}` does not have exactly one active slot")]
    NotOneHot(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("minority class has {found} rows, at least 2 are required")]
    TooFewMinoritySamples { found: usize },

    #[error("bad fold count: {0}")]
    BadFoldCount(String),

    #[error("bad synthetic data config: {0}")]
    BadConfig(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for TabularError {
    fn from(e: std::io::Error) -> Self {
        TabularError::Io(e.to_string())
    }
}
