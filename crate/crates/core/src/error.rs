use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("sample index {index} out of range for {n} samples")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("empty grid")]
    EmptyGrid,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("need at least {needed} positive points in the fit window, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("reference optimum is undefined for a nonconvex objective")]
    Nonconvex,

    #[error("initial point is outside the domain of the regularizer")]
    OutsideDomain,

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
