//! Crate-wide error type.

use std::fmt;
use std::io;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the workbench.
#[derive(Debug)]
pub enum Error {
    /// A caller-supplied value is out of range or inconsistent
    /// (e.g. a percentile outside (0, 50), an unknown radar type).
    InvalidArgument(String),
    /// An operation needed examples from a stratum that is empty
    /// (e.g. calibration on a set with no radar captures).
    MissingStratum(String),
    /// A model, checkpoint, or calibration artifact required by the
    /// requested operation is absent or incompatible.
    Configuration(String),
    /// A file or byte stream does not parse as the expected format.
    Format(String),
    /// Underlying I/O failure.
    Io(io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::MissingStratum(msg) => write!(f, "missing stratum: {msg}"),
            Error::Configuration(msg) => write!(f, "configuration error: {msg}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
            Error::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        Error::Io(err)
    }
}

impl From<toml::de::Error> for Error {
    fn from(err: toml::de::Error) -> Self {
        Error::Format(err.to_string())
    }
}

impl From<toml::ser::Error> for Error {
    fn from(err: toml::ser::Error) -> Self {
        Error::Format(err.to_string())
    }
}
