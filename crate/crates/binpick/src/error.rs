//! Error type shared across the crate, with a stable mapping to process
//! exit codes for the command-line front end.

use std::io;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad command-line arguments or an invalid runtime configuration.
    #[error("usage: {0}")]
    Usage(String),
    /// Invalid configuration value (out-of-range parameter, bad tier count, ...).
    #[error("config: {0}")]
    Config(String),
    /// Frame construction from non-orthonormal or non-unit axes.
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    /// Training data that cannot produce a classifier (e.g. a single class).
    #[error("degenerate training data: {0}")]
    DegenerateData(String),
    /// Feature vector dimension does not match the model.
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    /// Scene generation could not place the requested objects.
    #[error("scene capacity: {0}")]
    Capacity(String),
    /// An input refers to something that does not exist (e.g. a target
    /// object index outside the scene).
    #[error("input: {0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("parse {path}: {msg}")]
    Parse { path: String, msg: String },
}

impl Error {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn parse(path: impl AsRef<Path>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            msg: msg.into(),
        }
    }

    /// Process exit code: 2 usage/config, 3 I/O or parse, 4 degenerate data,
    /// 1 anything else. 0 is reserved for success.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => 2,
            Error::Io { .. } | Error::Parse { .. } => 3,
            Error::DegenerateData(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct_per_category() {
        let usage = Error::Usage("x".into());
        let io = Error::io("f", io::Error::new(io::ErrorKind::NotFound, "gone"));
        let degen = Error::DegenerateData("one class".into());
        assert_eq!(usage.exit_code(), 2);
        assert_eq!(io.exit_code(), 3);
        assert_eq!(degen.exit_code(), 4);
        assert_eq!(Error::Input("i".into()).exit_code(), 1);
    }
}
