//! Crate-wide error type.

use std::fmt;
use std::path::PathBuf;

/// Errors produced by any part of the library.
#[derive(Debug)]
pub enum Error {
    /// Tensor or layer shapes are inconsistent.
    Shape(String),
    /// A byte stream or file does not match its expected format.
    Format(String),
    /// A WAV clip advertises a sample rate other than the required one.
    Rate { expected: u32, actual: u32 },
    /// An underlying I/O failure, with the path it occurred on.
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// A dataset root is missing its official split list files.
    MissingList(PathBuf),
    /// A model or training configuration violates an invariant.
    Config(String),
    /// A dataset split is empty or otherwise unusable.
    Data(String),
    /// Training produced a non-finite loss.
    Divergence(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape(msg) => write!(f, "shape error: {msg}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
            Error::Rate { expected, actual } => {
                write!(
                    f,
                    "sample rate error: expected {expected} Hz, got {actual} Hz"
                )
            }
            Error::Io { path, source } => write!(f, "io error on {}: {source}", path.display()),
            Error::MissingList(path) => {
                write!(f, "missing split list file: {}", path.display())
            }
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Data(msg) => write!(f, "data error: {msg}"),
            Error::Divergence(msg) => write!(f, "divergence: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl Error {
    /// Wrap an I/O error with the path it happened on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
