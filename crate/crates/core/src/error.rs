use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A model parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// Geometric precondition violated (endpoint order, point not on a path, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Derived data does not match the data it claims to be derived from.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// The finite TASEP window cannot faithfully represent the requested run.
    #[error("horizon error: {0}")]
    Horizon(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
