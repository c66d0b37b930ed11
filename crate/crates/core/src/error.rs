use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value violates a precondition.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("mortality table row {row}: {message}")]
    Ingest { row: usize, message: String },

    /// The value recursion produced a non-finite or non-positive entry.
    #[error("value recursion diverged at grid index {index} (t = {time}), survivors {survivors}")]
    Divergence { index: usize, time: f64, survivors: usize },

    #[error("simulation result holds no usable samples: {0}")]
    Empty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
