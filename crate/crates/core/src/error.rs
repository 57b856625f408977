use thiserror::Error;

/// Errors produced anywhere in the conversion and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// The document is not well-formed JSON or does not follow the expected schema.
    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{field}: unknown component class {value:?}")]
    UnknownClass { field: String, value: String },

    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error("invalid bounding box: {0}")]
    InvalidBox(String),

    #[error("empty component list passed to align")]
    EmptyAlignment,

    #[error("{0:?} is not a widget class")]
    NotAWidget(crate::detection::ComponentClass),

    #[error("invalid project: {0}")]
    InvalidProject(String),

    #[error("a project holds at most {max} screens, got {got}")]
    TooManyScreens { max: usize, got: usize },

    #[error("image id mismatch: predictions for {predictions:?}, ground truth for {ground_truth:?}")]
    ImageMismatch { predictions: String, ground_truth: String },

    #[error("no ground truth available for evaluation")]
    NoGroundTruth,

    #[error("darknet configuration needs at least one class, got {0}")]
    InvalidClassCount(u32),

    #[error("format table: {0}")]
    FormatTable(String),

    #[error(transparent)]
    Zip(#[from] zip::result::ZipError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
