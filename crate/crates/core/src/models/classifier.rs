use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::models::{normalize, LabeledCorpus, UNK};
use crate::token::{tokenize, Sentence};

const FORMAT: &str = "alter-naive-bayes";
const VERSION: u32 = 1;

/// Multinomial naive Bayes over lowercased unigrams with Laplace smoothing.
///
/// `P(w | y) = (count(w, y) + beta) / (tokens(y) + beta * |V|)` where the
/// vocabulary includes [`UNK`]. Posteriors are computed in log space with
/// terms summed in lexicographic word order, so they do not depend on token
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeClassifier {
    labels: Vec<String>,
    beta: f64,
    vocabulary: BTreeSet<String>,
    documents: Vec<u64>,
    word_counts: Vec<BTreeMap<String, u64>>,
    class_tokens: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct Serialized {
    format: String,
    version: u32,
    labels: Vec<String>,
    beta: f64,
    vocabulary: Vec<String>,
    documents: Vec<u64>,
    word_counts: Vec<BTreeMap<String, u64>>,
}

impl AttributeClassifier {
    pub fn train(corpus: &LabeledCorpus, beta: f64) -> Result<Self, ModelError> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(ModelError::Train(format!("smoothing must be positive, got {beta}")));
        }
        let labels = corpus.labels().to_vec();
        if labels.len() < 2 {
            return Err(ModelError::Train("at least two labels are required".into()));
        }
        let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut documents = vec![0u64; labels.len()];
        let mut word_counts = vec![BTreeMap::new(); labels.len()];
        let mut vocabulary: BTreeSet<String> = [UNK.to_string()].into();
        for (label, text) in corpus.records() {
            let y = index[label.as_str()];
            documents[y] += 1;
            for word in tokenize(text).words() {
                let w = normalize(word);
                vocabulary.insert(w.clone());
                *word_counts[y].entry(w).or_insert(0) += 1;
            }
        }
        if let Some(y) = documents.iter().position(|&d| d == 0) {
            return Err(ModelError::Train(format!(
                "label {:?} has no training documents",
                labels[y]
            )));
        }
        Ok(Self::assemble(labels, beta, vocabulary, documents, word_counts))
    }

    fn assemble(
        labels: Vec<String>,
        beta: f64,
        vocabulary: BTreeSet<String>,
        documents: Vec<u64>,
        word_counts: Vec<BTreeMap<String, u64>>,
    ) -> Self {
        let class_tokens = word_counts.iter().map(|c| c.values().sum()).collect();
        AttributeClassifier {
            labels,
            beta,
            vocabulary,
            documents,
            word_counts,
            class_tokens,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn priors(&self) -> Vec<f64> {
        let total: u64 = self.documents.iter().sum();
        self.documents.iter().map(|&d| d as f64 / total as f64).collect()
    }

    fn symbol(&self, word: &str) -> String {
        let w = normalize(word);
        if self.vocabulary.contains(&w) {
            w
        } else {
            UNK.to_string()
        }
    }

    /// Smoothed `P(word | labels[class])`; unknown words use the [`UNK`] entry.
    pub fn likelihood(&self, word: &str, class: usize) -> f64 {
        self.likelihood_symbol(&self.symbol(word), class)
    }

    fn likelihood_symbol(&self, symbol: &str, class: usize) -> f64 {
        let count = self.word_counts[class].get(symbol).copied().unwrap_or(0);
        (count as f64 + self.beta) / (self.class_tokens[class] as f64 + self.beta * self.vocab_size() as f64)
    }

    /// Unnormalized log joint `ln P(y) + sum ln P(w | y)` per class.
    pub fn log_joint(&self, sentence: &Sentence) -> Vec<f64> {
        let mut bag: BTreeMap<String, u64> = BTreeMap::new();
        for word in sentence.words() {
            *bag.entry(self.symbol(word)).or_insert(0) += 1;
        }
        self.priors()
            .into_iter()
            .enumerate()
            .map(|(y, prior)| {
                bag.iter().fold(prior.ln(), |acc, (w, &n)| {
                    acc + n as f64 * self.likelihood_symbol(w, y).ln()
                })
            })
            .collect()
    }

    /// `P(y | sentence)` for every label, in label order. Sums to one.
    pub fn posterior(&self, sentence: &Sentence) -> Vec<f64> {
        let joint = self.log_joint(sentence);
        let max = joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = joint.iter().map(|j| (j - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    /// Index of the most probable label; ties go to the earlier label.
    pub fn predict(&self, sentence: &Sentence) -> usize {
        let post = self.posterior(sentence);
        post.iter()
            .enumerate()
            .fold(0, |best, (i, &p)| if p > post[best] { i } else { best })
    }

    pub fn save<W: Write>(&self, out: W) -> Result<(), ModelError> {
        let ser = Serialized {
            format: FORMAT.into(),
            version: VERSION,
            labels: self.labels.clone(),
            beta: self.beta,
            vocabulary: self.vocabulary.iter().cloned().collect(),
            documents: self.documents.clone(),
            word_counts: self.word_counts.clone(),
        };
        serde_json::to_writer_pretty(out, &ser).map_err(|e| ModelError::format(0, e.to_string()))
    }

    pub fn load<R: Read>(input: R) -> Result<Self, ModelError> {
        let ser: Serialized =
            serde_json::from_reader(input).map_err(|e| ModelError::format(e.line(), e.to_string()))?;
        let bad = |m: &str| ModelError::format(0, m.to_string());
        if ser.format != FORMAT || ser.version != VERSION {
            return Err(bad("unsupported model format or version"));
        }
        let n = ser.labels.len();
        if n < 2 || ser.documents.len() != n || ser.word_counts.len() != n {
            return Err(bad("label, document and count tables disagree"));
        }
        if !(ser.beta.is_finite() && ser.beta > 0.0) || ser.documents.contains(&0) {
            return Err(bad("invalid smoothing or empty class"));
        }
        let vocabulary: BTreeSet<String> = ser.vocabulary.into_iter().collect();
        if !vocabulary.contains(UNK)
            || ser
                .word_counts
                .iter()
                .flat_map(|c| c.keys())
                .any(|w| !vocabulary.contains(w))
        {
            return Err(bad("counts reference words outside the vocabulary"));
        }
        Ok(Self::assemble(
            ser.labels,
            ser.beta,
            vocabulary,
            ser.documents,
            ser.word_counts,
        ))
    }
}
