use std::collections::BTreeMap;

use crate::error::FeedbackError;
use crate::feedback::transport::min_cost_transport;
use crate::models::EmbeddingTable;
use crate::token::Sentence;

/// Normalized bag of words over in-vocabulary types, kept as integer counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Nbow<'a> {
    pub counts: BTreeMap<String, u64>,
    pub vectors: Vec<&'a [f64]>,
    pub dropped: Vec<String>,
}

impl Nbow<'_> {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Type weights in lexicographic type order; they sum to one.
    pub fn weights(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts.values().map(|&c| c as f64 / total).collect()
    }
}

pub fn nbow<'a>(sentence: &Sentence, emb: &'a EmbeddingTable) -> Nbow<'a> {
    let mut counts = BTreeMap::new();
    let mut dropped = Vec::new();
    for word in sentence.words() {
        if emb.contains(word) {
            *counts.entry(word.to_lowercase()).or_insert(0) += 1;
        } else {
            dropped.push(word.to_string());
        }
    }
    let vectors = counts
        .keys()
        .map(|w| emb.get(w).expect("filtered to known words"))
        .collect();
    Nbow {
        counts,
        vectors,
        dropped,
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Word mover's distance: exact optimal transport between the two nBOW
/// distributions with Euclidean ground cost. Words missing from `emb` are
/// dropped before normalizing.
pub fn wmd(a: &Sentence, b: &Sentence, emb: &EmbeddingTable) -> Result<f64, FeedbackError> {
    let left = nbow(a, emb);
    let right = nbow(b, emb);
    for (side, bag) in [("original", &left), ("edited", &right)] {
        if bag.counts.is_empty() {
            return Err(FeedbackError::Coverage {
                side,
                dropped: bag.dropped.clone(),
            });
        }
    }
    if left.counts == right.counts {
        return Ok(0.0);
    }
    // Scale both sides to total mass |a| * |b| so every weight is an integer.
    let (na, nb) = (left.total(), right.total());
    let supplies: Vec<u64> = left.counts.values().map(|&c| c * nb).collect();
    let demands: Vec<u64> = right.counts.values().map(|&c| c * na).collect();
    let plan = min_cost_transport(&supplies, &demands, |i, j| euclidean(left.vectors[i], right.vectors[j]));
    Ok(plan.cost / (na * nb) as f64)
}
