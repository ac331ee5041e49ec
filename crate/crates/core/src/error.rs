use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {degree} exceeds column count {cols}")]
    InvalidDegree { degree: usize, cols: usize },

    #[error("influence matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyShape { rows: usize, cols: usize },

    #[error("{what}: expected length {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("missing data file {0}")]
    MissingFile(PathBuf),

    #[error("{path}: bad magic number {found:#010x}, expected {expected:#010x}")]
    MagicMismatch { path: PathBuf, expected: u32, found: u32 },

    #[error("{path}: truncated payload ({actual} bytes, expected {expected})")]
    Truncated {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(what: &'static str, expected: usize, actual: usize) -> Self {
        Error::Dimension { what, expected, actual }
    }

    /// True for failures that originate in the input data rather than the
    /// configuration or the numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::MissingFile(_)
                | Error::MagicMismatch { .. }
                | Error::Truncated { .. }
                | Error::Format(_)
                | Error::EmptyDataset
                | Error::Io(_)
        )
    }

    pub fn is_numeric_error(&self) -> bool {
        matches!(self, Error::NonFinite(_))
    }
}
