use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Data(String),

    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),

    #[error("model container version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error(transparent)]
    Engine(#[from] polyreg_core::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit status:
    ///
    /// | code | meaning                              |
    /// |------|--------------------------------------|
    /// | 0    | success                              |
    /// | 2    | bad flags or config file             |
    /// | 3    | unreadable or malformed input data   |
    /// | 4    | model or numerical failure           |
    /// | 5    | model container version mismatch     |
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Io { .. } | Self::Csv { .. } | Self::Parse { .. } | Self::Data(_) | Self::Json(_) => 3,
            Self::VersionMismatch { .. } => 5,
            Self::Engine(_) => 4,
        }
    }
}
