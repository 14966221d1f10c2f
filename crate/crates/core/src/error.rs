use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid direction: {0}")]
    InvalidDirection(String),
    #[error("invalid depth {0}: depths start at 1")]
    InvalidDepth(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("resolution exceeded: translate needs radius {needed}, point window has {available}")]
    ResolutionExceeded { needed: i64, available: i64 },
    #[error("empty strip window")]
    EmptyWindow,
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
