use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The model specification is structurally wrong or fails validation.
    #[error("model error: {0}")]
    Model(String),

    /// The kernel window around the query point holds no usable data.
    #[error("insufficient local data ({count} points in window)")]
    InsufficientLocalData { count: usize },

    /// Estimator or schedule parameters violate their constraints.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("every grid point failed to produce an estimate")]
    AllPointsFailed,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
