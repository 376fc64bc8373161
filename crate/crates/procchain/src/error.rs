use procchain_core::Error as CoreError;
use std::path::PathBuf;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("capacity: {0}")]
    Capacity(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => EXIT_USAGE,
            AppError::Capacity(_) => EXIT_CAPACITY,
            AppError::Core(CoreError::Capacity { .. } | CoreError::Budget { .. }) => EXIT_CAPACITY,
            _ => EXIT_COMPUTATION,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
