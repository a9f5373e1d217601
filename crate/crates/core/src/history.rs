//! Append-only revision histories.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use crate::diff::diff;
use crate::error::EditError;
use crate::op::{apply_op, EditOp, OpKind};
use crate::token::Sentence;

/// Provider name to score; `None` marks a provider that failed for this sentence.
pub type FeedbackSnapshot = BTreeMap<String, Option<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Revision {
    pub index: usize,
    pub op: EditOp,
    pub result: Sentence,
    pub timestamp: DateTime<Utc>,
    pub feedback: FeedbackSnapshot,
    /// Word-level script derived for direct-typing submissions.
    pub script: Option<Vec<EditOp>>,
}

/// A distinct rewritten sentence and the revisions that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub sentence: Sentence,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevisionHistory {
    original: Sentence,
    revisions: Vec<Revision>,
}

impl RevisionHistory {
    pub fn new(original: Sentence) -> Self {
        RevisionHistory {
            original,
            revisions: Vec::new(),
        }
    }

    pub fn original(&self) -> &Sentence {
        &self.original
    }

    pub fn revisions(&self) -> &[Revision] {
        &self.revisions
    }

    pub fn len(&self) -> usize {
        self.revisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.revisions.is_empty()
    }

    /// Index of the newest revision, or -1 when nothing has been recorded.
    pub fn last_index(&self) -> i64 {
        self.revisions.len() as i64 - 1
    }

    /// The sentence currently shown to the annotator.
    pub fn current(&self) -> &Sentence {
        self.revisions.last().map_or(&self.original, |r| &r.result)
    }

    /// The sentence at revision `target`, where -1 is the original.
    pub fn sentence_at(&self, target: i64) -> Result<&Sentence, EditError> {
        match target {
            -1 => Ok(&self.original),
            t if t >= 0 && (t as usize) < self.revisions.len() => Ok(&self.revisions[t as usize].result),
            _ => Err(EditError::Index {
                target,
                len: self.revisions.len(),
            }),
        }
    }

    /// The sentence `op` would produce if appended now.
    pub fn preview(&self, op: &EditOp) -> Result<Sentence, EditError> {
        match op.kind {
            OpKind::Revert { target } => self.sentence_at(target).cloned(),
            _ => apply_op(self.current(), op),
        }
    }

    /// Appends a revision for `op`. The history is untouched on error.
    pub fn append(
        &mut self,
        op: EditOp,
        feedback: FeedbackSnapshot,
        timestamp: DateTime<Utc>,
    ) -> Result<&Revision, EditError> {
        let result = self.preview(&op)?;
        let script = match op.kind {
            OpKind::ReplaceSentence { .. } => Some(diff(self.current(), &result)),
            _ => None,
        };
        self.revisions.push(Revision {
            index: self.revisions.len(),
            op,
            result,
            timestamp,
            feedback,
            script,
        });
        Ok(self.revisions.last().expect("just pushed"))
    }

    /// Rolls back to revision `target` (-1 for the original) by appending a
    /// revert record. Nothing is truncated.
    pub fn revert(
        &mut self,
        target: i64,
        feedback: FeedbackSnapshot,
        timestamp: DateTime<Utc>,
    ) -> Result<&Revision, EditError> {
        self.append(EditOp::revert(target), feedback, timestamp)
    }

    /// Distinct revision results other than the original, in order of first
    /// appearance, each with every index it occurs at.
    pub fn extract_references(&self) -> Vec<Reference> {
        let mut refs: Vec<Reference> = Vec::new();
        for rev in &self.revisions {
            if rev.result == self.original {
                continue;
            }
            match refs.iter_mut().find(|r| r.sentence == rev.result) {
                Some(r) => r.indices.push(rev.index),
                None => refs.push(Reference {
                    sentence: rev.result.clone(),
                    indices: vec![rev.index],
                }),
            }
        }
        refs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::Source;
    use crate::token::tokenize;
    use chrono::TimeZone;

    fn ts(sec: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_700_000_000 + sec, 0).unwrap()
    }

    fn hotel() -> RevisionHistory {
        RevisionHistory::new(tokenize("My husband and I enjoy LA Hilton Hotel."))
    }

    fn lm(kind: OpKind) -> EditOp {
        kind.with_source(Source::LmRecommended)
    }

    #[test]
    fn append_records_result_and_feedback() {
        let mut h = hotel();
        let fb: FeedbackSnapshot = [("ED".to_string(), Some(1.0))].into();
        let rev = h
            .append(lm(OpKind::substitute(4, "love").unwrap()), fb.clone(), ts(0))
            .unwrap();
        assert_eq!(rev.index, 0);
        assert_eq!(rev.result.text(), "My husband and I love LA Hilton Hotel .");
        assert_eq!(rev.feedback, fb);
        assert_eq!(h.last_index(), 0);
    }

    #[test]
    fn failed_append_leaves_history_unchanged() {
        let mut h = hotel();
        h.append(OpKind::delete(0).typed(), FeedbackSnapshot::new(), ts(0))
            .unwrap();
        let before = h.clone();
        let err = h
            .append(OpKind::delete(40).typed(), FeedbackSnapshot::new(), ts(1))
            .unwrap_err();
        assert!(matches!(err, EditError::Position { .. }));
        assert_eq!(h, before);
    }

    #[test]
    fn revert_appends_instead_of_truncating() {
        let mut h = hotel();
        h.append(OpKind::delete(0).typed(), FeedbackSnapshot::new(), ts(0))
            .unwrap();
        h.append(OpKind::delete(0).typed(), FeedbackSnapshot::new(), ts(1))
            .unwrap();
        let p0 = h.revisions()[0].result.clone();
        h.revert(0, FeedbackSnapshot::new(), ts(2)).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(h.revisions()[2].result, p0);
        assert_eq!(h.revisions()[2].op, EditOp::revert(0));

        h.revert(-1, FeedbackSnapshot::new(), ts(3)).unwrap();
        assert_eq!(h.current(), h.original());

        let err = h.revert(5, FeedbackSnapshot::new(), ts(4)).unwrap_err();
        assert_eq!(err, EditError::Index { target: 5, len: 4 });
        assert!(h.revert(-2, FeedbackSnapshot::new(), ts(4)).is_err());
        assert_eq!(h.len(), 4);
    }

    #[test]
    fn replace_sentence_carries_derived_script() {
        let mut h = hotel();
        let rev = h
            .append(
                OpKind::replace_sentence("My husband and I love LA Hilton Hotel.").typed(),
                FeedbackSnapshot::new(),
                ts(0),
            )
            .unwrap();
        assert_eq!(
            rev.script.as_deref(),
            Some(&[OpKind::substitute(4, "love").unwrap().typed()][..])
        );

        let same = h
            .append(
                OpKind::replace_sentence("My husband and I love LA Hilton Hotel.").typed(),
                FeedbackSnapshot::new(),
                ts(1),
            )
            .unwrap();
        assert_eq!(same.script.as_deref(), Some(&[][..]));
    }

    #[test]
    fn references_dedupe_and_skip_original() {
        let mut h = hotel();
        h.revert(-1, FeedbackSnapshot::new(), ts(0)).unwrap();
        assert!(h.extract_references().is_empty());

        let mut h = hotel();
        h.append(OpKind::delete(0).typed(), FeedbackSnapshot::new(), ts(0))
            .unwrap();
        h.revert(0, FeedbackSnapshot::new(), ts(1)).unwrap();
        let refs = h.extract_references();
        assert_eq!(refs.len(), 1);
        assert_eq!(refs[0].indices, vec![0, 1]);
    }
}
