use std::path::PathBuf;

use thiserror::Error;

use crate::ultrametric::StrongViolation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid leaf index: {0}")]
    InvalidIndex(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {requested} values requested, budget is {budget}")]
    Capacity { requested: u128, budget: u128 },

    #[error("degenerate triangle: zero distance between points {0} and {1}")]
    DegenerateTriangle(usize, usize),

    #[error("matrix is not ultrametric: worst violation {0}")]
    NotUltrametric(StrongViolation),

    #[error("unsupported transform: {0}")]
    UnsupportedTransform(String),

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::File {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
