use std::path::PathBuf;

use requant_core::ParseError;

/// Failures surfaced by the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(#[from] requant_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("no manifest entry could be evaluated")]
    ManifestEmpty,
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        AppError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 1 usage, 2 input format, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) | AppError::Invalid(_) => 1,
            AppError::Parse { .. } | AppError::Format { .. } | AppError::ManifestEmpty => 2,
            AppError::Io { .. } => 3,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
