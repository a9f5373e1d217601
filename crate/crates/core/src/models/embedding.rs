use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use crate::error::ModelError;
use crate::models::normalize;

/// Word vectors keyed by lowercased word.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    entries: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Result<Self, ModelError> {
        if dimension == 0 {
            return Err(ModelError::format(0, "dimension must be positive"));
        }
        Ok(EmbeddingTable {
            dimension,
            entries: BTreeMap::new(),
        })
    }

    /// Inserts or replaces a vector. Returns an error if its length is wrong.
    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<(), ModelError> {
        if vector.len() != self.dimension {
            return Err(ModelError::format(
                0,
                format!(
                    "vector for {word:?} has {} values, expected {}",
                    vector.len(),
                    self.dimension
                ),
            ));
        }
        self.entries.insert(normalize(word), vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.entries.get(&normalize(word)).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.get(word).is_some()
    }

    /// Entries in lexicographic word order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.entries.iter().map(|(w, v)| (w.as_str(), v.as_slice()))
    }

    /// Parses the word2vec text format: an optional `count dim` header, then
    /// one `word v1 ... vd` line per word. Later duplicates win.
    pub fn load<R: BufRead>(reader: R) -> Result<Self, ModelError> {
        let mut table: Option<EmbeddingTable> = None;
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| ModelError::format(lineno, e.to_string()))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if lineno == 1 && fields.len() == 2 {
                if let (Ok(_count), Ok(dim)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                    table = Some(
                        EmbeddingTable::new(dim)
                            .map_err(|_| ModelError::format(lineno, "dimension must be positive"))?,
                    );
                    continue;
                }
            }
            let (word, values) = fields.split_first().expect("non-empty");
            let vector = values
                .iter()
                .map(|v| match v.parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(x),
                    _ => Err(ModelError::format(lineno, format!("bad vector value {v:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let table = match &mut table {
                Some(t) => t,
                None => table.insert(
                    EmbeddingTable::new(vector.len()).map_err(|_| ModelError::format(lineno, "word without vector"))?,
                ),
            };
            table.insert(word, vector).map_err(|e| match e {
                ModelError::Format { message, .. } => ModelError::format(lineno, message),
                other => other,
            })?;
        }
        match table {
            Some(t) if !t.is_empty() => Ok(t),
            _ => Err(ModelError::format(0, "no word vectors found")),
        }
    }

    /// Writes the table with a `count dim` header.
    pub fn save<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dimension)?;
        for (word, vector) in &self.entries {
            write!(out, "{word}")?;
            for v in vector {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<EmbeddingTable, ModelError> {
        EmbeddingTable::load(text.as_bytes())
    }

    #[test]
    fn parses_with_header() {
        let t = load("2 2\na 1 0\nb 0 1").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.dimension(), 2);
        assert_eq!(t.get("b"), Some(&[0.0, 1.0][..]));
    }

    #[test]
    fn parses_without_header_and_is_case_insensitive() {
        let t = load("Hotel 0.5 -1.25 3\nlove 1 2 3\n").unwrap();
        assert_eq!(t.dimension(), 3);
        assert_eq!(t.get("HOTEL"), Some(&[0.5, -1.25, 3.0][..]));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = load("2 2\na 1 0\nb 0 1 2").unwrap_err();
        assert_eq!(err, ModelError::format(3, "vector for \"b\" has 3 values, expected 2"));
        assert!(load("a 1 0\nb 1").is_err());
    }

    #[test]
    fn empty_stream_is_rejected() {
        assert!(load("").is_err());
        assert!(load("0 4\n").is_err());
        assert!(load("a 1 x").is_err());
    }

    #[test]
    fn duplicates_last_wins() {
        let t = load("a 1 0\nb 0 1\na 2 2").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("a"), Some(&[2.0, 2.0][..]));
    }

    #[test]
    fn save_round_trips() {
        let t = load("a 0.1 -7e-3\nb 1e300 0.30000000000000004").unwrap();
        let mut buf = Vec::new();
        t.save(&mut buf).unwrap();
        assert_eq!(EmbeddingTable::load(&buf[..]).unwrap(), t);
    }
}
