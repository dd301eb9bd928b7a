use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown point `{0}`")]
    UnknownPoint(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("angular distance is undefined for a zero vector")]
    ZeroVector,

    #[error("feature value {value} at coordinate {index} is not binary")]
    NonBinaryFeature { index: usize, value: f64 },

    #[error("point `{0}` falls in no known bucket")]
    UnknownBucket(String),

    #[error("family of {size} members exceeds the enumeration cap of {cap}")]
    FamilyTooLarge { size: u128, cap: u128 },

    #[error("family is not enumerable: {0}")]
    NotEnumerable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no point pairs within distance {0}")]
    EmptyPairSet(f64),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("duplicate point id `{0}`")]
    DuplicateId(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("grid spacing {spacing} is not below the required {required}")]
    GridTooCoarse { spacing: f64, required: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::InvalidData(e.to_string())
    }
}
