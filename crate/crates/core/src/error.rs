use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative solver ran out of iterations.
    #[error("no convergence after {iterations} iterations (best iterate {best})")]
    Convergence { best: f64, iterations: usize },

    /// The inputs violate a precondition the caller is expected to check.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A study row failed validation.
    #[error("row {id}: {message}")]
    Validation { id: String, message: String },

    /// A study or outcome file could not be parsed.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
