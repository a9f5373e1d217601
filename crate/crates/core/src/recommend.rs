//! Word-substitution recommendations.

use serde::{Deserialize, Serialize};

use crate::error::EditError;
use crate::models::{EmbeddingTable, NGramLm, BOS, EOS, UNK};
use crate::token::Sentence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecommendationProvider {
    Similarity,
    LanguageModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub word: String,
    pub score: f64,
    pub provider: RecommendationProvider,
}

/// Sorts by descending score, then word, and keeps the first `k`.
fn rank(mut scored: Vec<(String, f64)>, k: usize, provider: RecommendationProvider) -> Vec<Recommendation> {
    // Adding 0.0 maps -0.0 to 0.0 so signed zeros tie under total_cmp.
    for (_, score) in &mut scored {
        *score += 0.0;
    }
    scored.sort_by(|(wa, sa), (wb, sb)| sb.total_cmp(sa).then_with(|| wa.cmp(wb)));
    scored
        .into_iter()
        .take(k)
        .map(|(word, score)| Recommendation { word, score, provider })
        .collect()
}

fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// The `k` words closest to `word` by cosine similarity, excluding `word`.
/// Unknown or zero-norm query words yield no suggestions.
pub fn similar_words(word: &str, k: usize, emb: &EmbeddingTable) -> Vec<Recommendation> {
    let Some(query) = emb.get(word) else {
        return Vec::new();
    };
    let query_key = word.to_lowercase();
    let scored = emb
        .iter()
        .filter(|(w, _)| *w != query_key)
        .filter_map(|(w, v)| cosine(query, v).map(|s| (w.to_string(), s)))
        .collect();
    rank(scored, k, RecommendationProvider::Similarity)
}

/// The `k` most probable replacements for the word at `position`, scored by
/// the language model given the left context.
pub fn lm_predict(
    sentence: &Sentence,
    position: usize,
    k: usize,
    lm: &NGramLm,
) -> Result<Vec<Recommendation>, EditError> {
    let words: Vec<&str> = sentence.words().collect();
    if position >= words.len() {
        return Err(EditError::Position {
            position,
            len: words.len(),
        });
    }
    let context = lm.context(&words[..position]);
    let current = words[position].to_lowercase();
    let scored = lm
        .vocabulary()
        .filter(|w| ![BOS, EOS, UNK].contains(w) && *w != current)
        .map(|w| (w.to_string(), lm.cond_prob_symbols(&context, w)))
        .collect();
    Ok(rank(scored, k, RecommendationProvider::LanguageModel))
}
