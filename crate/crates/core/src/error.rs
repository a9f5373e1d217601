use thiserror::Error;

/// Failures of the edit-operation algebra and revision histories.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("position {position} out of range for sentence of length {len}")]
    Position { position: usize, len: usize },
    #[error("invalid operation: {0}")]
    InvalidOp(String),
    #[error("revision index {target} out of range for history of {len} revisions")]
    Index { target: i64, len: usize },
    #[error("revert operations have no reporting category")]
    NotCategorizable,
    #[error("invalid token {0:?}: tokens must be non-empty and contain no whitespace")]
    InvalidToken(String),
}

/// Failures while loading or training text models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("training error: {0}")]
    Train(String),
}

impl ModelError {
    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        ModelError::Format {
            line,
            message: message.into(),
        }
    }
}

/// Failures of individual feedback providers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeedbackError {
    #[error("no in-vocabulary words on the {side} side (dropped: {dropped:?})")]
    Coverage { side: &'static str, dropped: Vec<String> },
    #[error("empty input sentence")]
    EmptyInput,
    #[error("unknown label {0:?}")]
    Label(String),
    #[error("not a probability distribution: {0}")]
    Distribution(String),
    #[error("provider configuration: {0}")]
    Config(String),
}

/// Failures while parsing the revision-history export format.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("export line {line}: {message}")]
pub struct ExportError {
    pub line: usize,
    pub message: String,
}

impl ExportError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        ExportError {
            line,
            message: message.into(),
        }
    }
}
