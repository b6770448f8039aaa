use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] hermite_core::Error),
    #[error("circulant embedding failed: eigenvalue {eigenvalue:e} at index {index}")]
    Embedding { eigenvalue: f64, index: usize },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Exit code of the command-line tool: 1 when a well-formed request has
    /// no valid answer, 2 for usage, parameter and input errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(hermite_core::Error::IllPosed(_)) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
