use std::collections::BTreeSet;
use std::io::BufRead;

use crate::error::ModelError;
use crate::token::tokenize;

/// Labeled training texts with a declared label set.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    labels: Vec<String>,
    records: Vec<(String, String)>,
}

impl LabeledCorpus {
    /// Builds a corpus whose label set is the sorted set of labels used.
    pub fn new<I, L, T>(records: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (L, T)>,
        L: Into<String>,
        T: Into<String>,
    {
        let records: Vec<(String, String)> = records.into_iter().map(|(l, t)| (l.into(), t.into())).collect();
        let labels: BTreeSet<String> = records.iter().map(|(l, _)| l.clone()).collect();
        Self::with_labels(labels.into_iter().collect(), records)
    }

    /// Builds a corpus against an explicit label order. Labels may be unused
    /// here; training rejects them later.
    pub fn with_labels(labels: Vec<String>, records: Vec<(String, String)>) -> Result<Self, ModelError> {
        let declared: BTreeSet<&String> = labels.iter().collect();
        if declared.len() != labels.len() {
            return Err(ModelError::format(0, "duplicate label in label set"));
        }
        for (i, (label, text)) in records.iter().enumerate() {
            if !declared.contains(label) {
                return Err(ModelError::format(i + 1, format!("undeclared label {label:?}")));
            }
            if tokenize(text).is_empty() {
                return Err(ModelError::format(i + 1, "empty text"));
            }
        }
        Ok(LabeledCorpus { labels, records })
    }

    /// Parses `label<TAB>text` lines. Blank lines are skipped.
    pub fn parse_tsv<R: BufRead>(reader: R) -> Result<Self, ModelError> {
        let mut records = Vec::new();
        let mut line_numbers = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| ModelError::format(i + 1, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let (label, text) = line
                .split_once('\t')
                .ok_or_else(|| ModelError::format(i + 1, "expected label<TAB>text"))?;
            let label = label.trim();
            if label.is_empty() {
                return Err(ModelError::format(i + 1, "empty label"));
            }
            records.push((label.to_string(), text.to_string()));
            line_numbers.push(i + 1);
        }
        // Report errors against file line numbers rather than record numbers.
        Self::new(records).map_err(|e| match e {
            ModelError::Format { line, message } if line > 0 => ModelError::format(line_numbers[line - 1], message),
            other => other,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn records(&self) -> &[(String, String)] {
        &self.records
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|(_, t)| t.as_str())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
