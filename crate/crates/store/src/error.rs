use std::io;
use std::path::PathBuf;

use alter_core::{EditError, ExportError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("corrupt log for job {job} at line {line}: {message}")]
    CorruptLog { job: String, line: usize, message: String },
    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error("import failed: {0}")]
    Import(#[from] ExportError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;
