//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// Incompatible matrix/layer dimensions. Carries both shapes.
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    /// A rating line, config file, or other text input failed to parse.
    Parse { location: String, message: String },
    /// Config validation failures; every offending key is listed at once.
    Config(Vec<String>),
    /// Dataset construction or consistency failure.
    Data(String),
    /// Checkpoint encoding/decoding failure.
    Checkpoint(String),
    /// A parameter block or loss stopped being finite.
    NonFinite(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape { op, left, right } => write!(
                f,
                "{op}: incompatible shapes {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::Parse { location, message } => write!(f, "parse error at {location}: {message}"),
            Error::Config(keys) => write!(f, "invalid config: {}", keys.join("; ")),
            Error::Data(msg) => write!(f, "data error: {msg}"),
            Error::Checkpoint(msg) => write!(f, "checkpoint error: {msg}"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
