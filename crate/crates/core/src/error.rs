use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A pair of points is a cut-locus pair (antipodal on the sphere),
    /// so the minimizing geodesic and its intermediate points are not unique.
    #[error("cut-locus pair: {0}")]
    CutLocus(String),

    /// Inputs live on different spaces or grids.
    #[error("mismatch: {0}")]
    Mismatch(String),

    /// Problem size exceeds a documented cap.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    /// The operation needs a representation the input does not have.
    #[error("unsupported representation: {0}")]
    Unsupported(String),

    /// Malformed input text.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
