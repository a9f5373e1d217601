//! The edit-operation algebra.
//!
//! Word-level operations carry a [`Phrase`] payload, so a single recorded step
//! can insert or substitute several words at once (for example replacing
//! `My husband and I` with `Family`). The unit forms (`span == 1`, one-word
//! payload) are what [`crate::diff`] produces.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::EditError;
use crate::token::{detokenize, tokenize, Sentence, Token};

/// Where an operation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Typed,
    SimilarityRecommended,
    LmRecommended,
    System,
}

impl Source {
    pub fn is_recommended(self) -> bool {
        matches!(self, Source::SimilarityRecommended | Source::LmRecommended)
    }
}

/// A non-empty run of tokens, written on the wire as its detokenized text.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Phrase(Vec<Token>);

impl Phrase {
    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for Phrase {
    type Err = EditError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let tokens = tokenize(text).into_tokens();
        if tokens.is_empty() {
            return Err(EditError::InvalidOp(format!("empty word payload {text:?}")));
        }
        Ok(Phrase(tokens))
    }
}

impl TryFrom<String> for Phrase {
    type Error = EditError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Phrase> for String {
    fn from(phrase: Phrase) -> Self {
        phrase.to_string()
    }
}

impl From<Token> for Phrase {
    fn from(token: Token) -> Self {
        Phrase(vec![token])
    }
}

impl fmt::Display for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&detokenize(&Sentence::new(self.0.clone())))
    }
}

impl fmt::Debug for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_string())
    }
}

fn one() -> usize {
    1
}

fn is_one(n: &usize) -> bool {
    *n == 1
}

/// The structural part of an operation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpKind {
    /// Inserts `text` so that its first token lands at `position`.
    Insert { position: usize, text: Phrase },
    /// Removes `span` tokens starting at `position`.
    Delete {
        position: usize,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        span: usize,
    },
    /// Replaces `span` tokens starting at `position` with `text`.
    Substitute {
        position: usize,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        span: usize,
        text: Phrase,
    },
    /// Moves the token at `from` so that it ends up at index `to`.
    Reorder { from: usize, to: usize },
    /// Direct-typing submission of a whole sentence.
    ReplaceSentence { text: String },
    /// Rollback to revision `target`; `-1` is the original sentence.
    Revert { target: i64 },
}

impl OpKind {
    pub fn insert(position: usize, text: &str) -> Result<Self, EditError> {
        Ok(OpKind::Insert {
            position,
            text: text.parse()?,
        })
    }

    pub fn delete(position: usize) -> Self {
        OpKind::Delete { position, span: 1 }
    }

    pub fn delete_span(position: usize, span: usize) -> Self {
        OpKind::Delete { position, span }
    }

    pub fn substitute(position: usize, text: &str) -> Result<Self, EditError> {
        Self::substitute_span(position, 1, text)
    }

    pub fn substitute_span(position: usize, span: usize, text: &str) -> Result<Self, EditError> {
        Ok(OpKind::Substitute {
            position,
            span,
            text: text.parse()?,
        })
    }

    pub fn reorder(from: usize, to: usize) -> Self {
        OpKind::Reorder { from, to }
    }

    pub fn replace_sentence(text: impl Into<String>) -> Self {
        OpKind::ReplaceSentence { text: text.into() }
    }

    pub fn with_source(self, source: Source) -> EditOp {
        EditOp { kind: self, source }
    }

    pub fn typed(self) -> EditOp {
        self.with_source(Source::Typed)
    }
}

/// One atomic revision action with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EditOp {
    #[serde(flatten)]
    pub kind: OpKind,
    pub source: Source,
}

impl EditOp {
    pub fn new(kind: OpKind, source: Source) -> Self {
        EditOp { kind, source }
    }

    pub fn revert(target: i64) -> Self {
        EditOp {
            kind: OpKind::Revert { target },
            source: Source::System,
        }
    }

    pub fn is_revert(&self) -> bool {
        matches!(self.kind, OpKind::Revert { .. })
    }
}

/// The categories operations are reported under in distribution tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReportingCategory {
    WordTyping,
    Deletion,
    Substitution,
    Reordering,
    SentenceTyping,
}

impl ReportingCategory {
    pub const ALL: [ReportingCategory; 5] = [
        ReportingCategory::WordTyping,
        ReportingCategory::Deletion,
        ReportingCategory::Substitution,
        ReportingCategory::Reordering,
        ReportingCategory::SentenceTyping,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportingCategory::WordTyping => "WordTyping",
            ReportingCategory::Deletion => "Deletion",
            ReportingCategory::Substitution => "Substitution",
            ReportingCategory::Reordering => "Reordering",
            ReportingCategory::SentenceTyping => "SentenceTyping",
        }
    }
}

impl fmt::Display for ReportingCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Maps an operation to its reporting category. Reverts have none.
pub fn category_of(op: &EditOp) -> Result<ReportingCategory, EditError> {
    Ok(match op.kind {
        OpKind::Delete { .. } => ReportingCategory::Deletion,
        OpKind::Reorder { .. } => ReportingCategory::Reordering,
        OpKind::ReplaceSentence { .. } => ReportingCategory::SentenceTyping,
        OpKind::Insert { .. } | OpKind::Substitute { .. } => {
            if op.source.is_recommended() {
                ReportingCategory::Substitution
            } else {
                ReportingCategory::WordTyping
            }
        }
        OpKind::Revert { .. } => return Err(EditError::NotCategorizable),
    })
}

fn check_range(position: usize, span: usize, len: usize) -> Result<(), EditError> {
    if span == 0 {
        return Err(EditError::InvalidOp("span must be at least 1".into()));
    }
    match position.checked_add(span) {
        Some(end) if end <= len => Ok(()),
        _ => Err(EditError::Position {
            position: position.saturating_add(span - 1),
            len,
        }),
    }
}

/// Applies a non-revert operation to a sentence.
pub fn apply_op(sentence: &Sentence, op: &EditOp) -> Result<Sentence, EditError> {
    let len = sentence.len();
    let mut tokens = sentence.tokens().to_vec();
    match &op.kind {
        OpKind::Insert { position, text } => {
            if *position > len {
                return Err(EditError::Position {
                    position: *position,
                    len,
                });
            }
            tokens.splice(*position..*position, text.tokens().iter().cloned());
        }
        OpKind::Delete { position, span } => {
            check_range(*position, *span, len)?;
            tokens.drain(*position..*position + *span);
        }
        OpKind::Substitute { position, span, text } => {
            check_range(*position, *span, len)?;
            tokens.splice(*position..*position + *span, text.tokens().iter().cloned());
        }
        OpKind::Reorder { from, to } => {
            if from == to {
                return Err(EditError::InvalidOp("reorder source and destination are equal".into()));
            }
            for &p in [from, to] {
                if p >= len {
                    return Err(EditError::Position { position: p, len });
                }
            }
            let moved = tokens.remove(*from);
            tokens.insert(*to, moved);
        }
        OpKind::ReplaceSentence { text } => return Ok(tokenize(text)),
        OpKind::Revert { .. } => {
            return Err(EditError::InvalidOp(
                "revert is resolved against a revision history".into(),
            ))
        }
    }
    Ok(Sentence::new(tokens))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn original() -> Sentence {
        tokenize("My husband and I enjoy LA Hilton Hotel.")
    }

    #[test]
    fn substitute_and_delete_follow_table_rows() {
        let p1 = apply_op(&original(), &OpKind::substitute(4, "love").unwrap().typed()).unwrap();
        assert_eq!(p1.text(), "My husband and I love LA Hilton Hotel .");
        let p2 = apply_op(&p1, &OpKind::delete(5).typed()).unwrap();
        assert_eq!(p2.text(), "My husband and I love Hilton Hotel .");
    }

    #[test]
    fn insert_into_empty() {
        let s = apply_op(&Sentence::default(), &OpKind::insert(0, "x").unwrap().typed()).unwrap();
        assert_eq!(s.text(), "x");
    }

    #[test]
    fn phrase_operations() {
        let s = apply_op(&original(), &OpKind::substitute_span(0, 4, "Family").unwrap().typed()).unwrap();
        assert_eq!(s.text(), "Family enjoy LA Hilton Hotel .");
        let s = apply_op(&s, &OpKind::insert(5, "in Los Angeles").unwrap().typed()).unwrap();
        assert_eq!(s.text(), "Family enjoy LA Hilton Hotel in Los Angeles .");
        let s = apply_op(&s, &OpKind::delete_span(5, 3).typed()).unwrap();
        assert_eq!(s.text(), "Family enjoy LA Hilton Hotel .");
    }

    #[test]
    fn reorder_places_token_at_destination() {
        let s = Sentence::from_words(["a", "b", "c", "d"]).unwrap();
        let fwd = apply_op(&s, &OpKind::reorder(0, 2).typed()).unwrap();
        assert_eq!(fwd.text(), "b c a d");
        let back = apply_op(&fwd, &OpKind::reorder(2, 0).typed()).unwrap();
        assert_eq!(back, s);
        let tail = apply_op(&s, &OpKind::reorder(1, 3).typed()).unwrap();
        assert_eq!(tail.text(), "a c d b");
    }

    #[test]
    fn range_errors() {
        let s = Sentence::from_words(["a", "b"]).unwrap();
        assert_eq!(
            apply_op(&s, &OpKind::delete(2).typed()),
            Err(EditError::Position { position: 2, len: 2 })
        );
        assert!(matches!(
            apply_op(&s, &OpKind::insert(3, "x").unwrap().typed()),
            Err(EditError::Position { .. })
        ));
        assert!(matches!(
            apply_op(&s, &OpKind::delete_span(1, 2).typed()),
            Err(EditError::Position { .. })
        ));
        assert!(matches!(
            apply_op(&s, &OpKind::delete_span(0, 0).typed()),
            Err(EditError::InvalidOp(_))
        ));
        assert!(matches!(
            apply_op(&s, &OpKind::reorder(1, 1).typed()),
            Err(EditError::InvalidOp(_))
        ));
        assert!(matches!(apply_op(&s, &EditOp::revert(0)), Err(EditError::InvalidOp(_))));
    }

    #[test]
    fn empty_payload_is_rejected() {
        assert!(OpKind::insert(0, "   ").is_err());
        assert!(
            serde_json::from_str::<EditOp>(r#"{"kind":"insert","position":0,"text":"","source":"typed"}"#).is_err()
        );
    }

    #[test]
    fn categories() {
        let sub = OpKind::substitute(4, "love")
            .unwrap()
            .with_source(Source::LmRecommended);
        assert_eq!(category_of(&sub), Ok(ReportingCategory::Substitution));
        let ins = OpKind::insert(0, "All").unwrap().typed();
        assert_eq!(category_of(&ins), Ok(ReportingCategory::WordTyping));
        let typed_sub = OpKind::substitute(0, "x").unwrap().typed();
        assert_eq!(category_of(&typed_sub), Ok(ReportingCategory::WordTyping));
        let rec_ins = OpKind::insert(0, "x")
            .unwrap()
            .with_source(Source::SimilarityRecommended);
        assert_eq!(category_of(&rec_ins), Ok(ReportingCategory::Substitution));
        assert_eq!(
            category_of(&OpKind::replace_sentence("hi").typed()),
            Ok(ReportingCategory::SentenceTyping)
        );
        assert_eq!(category_of(&OpKind::delete(0).typed()), Ok(ReportingCategory::Deletion));
        assert_eq!(
            category_of(&OpKind::reorder(0, 1).typed()),
            Ok(ReportingCategory::Reordering)
        );
        assert_eq!(category_of(&EditOp::revert(0)), Err(EditError::NotCategorizable));
    }

    #[test]
    fn wire_shape() {
        let op = OpKind::substitute(4, "love")
            .unwrap()
            .with_source(Source::LmRecommended);
        let json = serde_json::to_string(&op).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"substitute","position":4,"text":"love","source":"lm_recommended"}"#
        );
        let span: EditOp =
            serde_json::from_str(r#"{"kind":"substitute","position":0,"span":4,"text":"Family","source":"typed"}"#)
                .unwrap();
        assert_eq!(span.kind, OpKind::substitute_span(0, 4, "Family").unwrap());
        assert_eq!(serde_json::from_str::<EditOp>(&json).unwrap(), op);
        assert_eq!(
            serde_json::to_string(&EditOp::revert(-1)).unwrap(),
            r#"{"kind":"revert","target":-1,"source":"system"}"#
        );
    }
}
