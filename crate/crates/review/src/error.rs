use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid request: {0}")]
    Validation(String),

    #[error("no active model: {0}")]
    NotReady(String),

    #[error("cannot train: {0}")]
    Training(String),

    #[error("unauthorized")]
    Unauthorized,

    #[error("journal: {0}")]
    Journal(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] delib_core::Error),
}

impl ServiceError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> ServiceError {
        ServiceError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Machine-readable kind used in error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Validation(_) => "validation",
            ServiceError::NotReady(_) => "not_ready",
            ServiceError::Training(_) => "training",
            ServiceError::Unauthorized => "unauthorized",
            ServiceError::Journal(_) | ServiceError::Io { .. } => "storage",
            ServiceError::Core(_) => "internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, ServiceError>;
