use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    /// The stream ended in the middle of a frame payload.
    #[error("truncated frame payload after frame {}", last_complete.map_or("<none>".to_string(), |i| i.to_string()))]
    Truncated { last_complete: Option<u64> },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("image decode error in {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("width mismatch: expected {expected}, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("scan row {lambda} outside frame of height {height}")]
    LineOutOfBounds { lambda: usize, height: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("plugin error: {0}")]
    Plugin(String),

    #[error("malformed record on line {line}: {message}")]
    Record { line: usize, message: String },
}
