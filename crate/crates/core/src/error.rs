use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({i}, {j}) out of range for {width}x{height} screen")]
    Index {
        i: usize,
        j: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("malformed {kind} file {path}: {reason}")]
    Format {
        kind: &'static str,
        path: PathBuf,
        reason: String,
    },

    #[error("refinement backend failed: {message}{}", stderr_suffix(.stderr))]
    Backend { message: String, stderr: String },

    #[error("sweep grid mismatch: {0}")]
    Grid(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn stderr_suffix(stderr: &str) -> String {
    if stderr.trim().is_empty() {
        String::new()
    } else {
        format!("\n--- backend stderr ---\n{}", stderr.trim_end())
    }
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Backend { .. } => 3,
            _ => 2,
        }
    }

    pub(crate) fn format(kind: &'static str, path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            kind,
            path: path.into(),
            reason: reason.into(),
        }
    }
}
