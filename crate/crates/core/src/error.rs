use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid training data: {0}")]
    InvalidData(String),

    #[error("{path}: parse error at byte offset {offset}: {message}")]
    Parse {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("checksum mismatch for {path}: expected {expected}, got {actual}")]
    Checksum {
        path: PathBuf,
        expected: String,
        actual: String,
    },

    #[error("download failed for {url}: {message}")]
    Download { url: String, message: String },

    #[error("unsupported file format: {0}")]
    Format(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code for the command-line runner: 2 for data problems,
    /// 1 for invalid parameters, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Parse { .. }
            | Error::Checksum { .. }
            | Error::Download { .. }
            | Error::Format(_)
            | Error::Io { .. } => 2,
            Error::InvalidParameter(_) => 1,
            _ => 3,
        }
    }
}
