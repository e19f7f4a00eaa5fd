use thiserror::Error;

/// Errors raised by the formation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown robot id {0}")]
    UnknownRobot(usize),

    #[error("unknown tag id {0}")]
    UnknownTag(usize),

    #[error("singular geometry on edge ({0}, {1}): predicted range below 1e-9 m")]
    SingularGeometry(usize, usize),

    #[error("degenerate separation between sorted robots {0} and {1}")]
    DegeneratePair(usize, usize),

    #[error("invalid index order: expected n < m, got n = {n}, m = {m}")]
    IndexOrder { n: usize, m: usize },

    #[error("non-finite cost at probe coordinate {coordinate}")]
    NonFiniteProbe { coordinate: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
