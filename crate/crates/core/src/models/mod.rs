//! Desk-scale statistical models behind feedback and recommendation.
//!
//! Models lowercase their input; sentences themselves keep their case.

mod classifier;
mod corpus;
mod embedding;
mod ngram;

pub use classifier::AttributeClassifier;
pub use corpus::LabeledCorpus;
pub use embedding::EmbeddingTable;
pub use ngram::{NGramLm, BOS, EOS, UNK};

pub(crate) fn normalize(word: &str) -> String {
    word.to_lowercase()
}
