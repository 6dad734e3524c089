use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document {file}{}: {reason}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    MalformedDocument {
        file: String,
        line: Option<usize>,
        reason: String,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("duplicate document {0}")]
    DuplicateDocument(String),

    #[error("reviewer {reviewer} has no annotations for batch {batch}")]
    MissingAnnotation { reviewer: String, batch: String },

    #[error("vocabulary is empty: no tokens in the training paragraphs")]
    EmptyVocabulary,

    #[error("degenerate training data: {0}")]
    DegenerateTraining(String),

    #[error("invalid hyper-parameter: {0}")]
    InvalidHyperParameter(String),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("empty sequence")]
    EmptySequence,

    #[error("invalid span: {0}")]
    InvalidSpan(String),

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("alignment error: lengths {left} and {right} differ")]
    Alignment { left: usize, right: usize },

    #[error("confidence interval undefined: {0}")]
    UndefinedInterval(String),

    #[error("reports are not comparable: {0}")]
    Comparison(String),

    #[error("kappa undefined: {0}")]
    UndefinedKappa(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
