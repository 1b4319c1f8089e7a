use thiserror::Error;

/// Errors produced by fitting, applying and (de)serializing models.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("feature has no finite values")]
    NoFiniteValues,

    #[error("data error: {0}")]
    Data(String),

    #[error("model parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported model format version {found} (expected {expected})")]
    Version { found: u64, expected: u64 },

    #[error("invalid model field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
