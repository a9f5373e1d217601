//! Core of the assisted rewriting toolkit.
//!
//! - [`token`], [`op`], [`diff`] and [`history`]: tokenization, the word-level
//!   edit algebra, minimal edit scripts and append-only revision histories.
//! - [`models`]: word embeddings, an add-alpha n-gram language model and a
//!   naive-Bayes attribute classifier.
//! - [`feedback`] and [`recommend`]: sentence scores (ED, WMD, PPL, Class,
//!   Entropy), leave-one-out salience and substitution suggestions.
//! - [`export`] and [`analysis`]: the history export format and the reports
//!   computed from it.

pub mod analysis;
pub mod diff;
pub mod error;
pub mod export;
pub mod feedback;
pub mod history;
pub mod models;
pub mod op;
pub mod recommend;
pub mod token;

pub use diff::diff;
pub use error::{EditError, ExportError, FeedbackError, ModelError};
pub use export::{JobHeader, JobRecord, JobStatus};
pub use history::{FeedbackSnapshot, Reference, Revision, RevisionHistory};
pub use op::{apply_op, category_of, EditOp, OpKind, Phrase, ReportingCategory, Source};
pub use token::{detokenize, tokenize, Sentence, Token};
