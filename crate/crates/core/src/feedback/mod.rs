//! Sentence-level feedback providers and word-level salience.

mod transport;
mod wmd;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use transport::{min_cost_transport, TransportPlan};
pub use wmd::{euclidean, nbow, wmd, Nbow};

use crate::error::FeedbackError;
use crate::history::FeedbackSnapshot;
use crate::models::{AttributeClassifier, EmbeddingTable, NGramLm};
use crate::token::Sentence;

pub const EDIT_DISTANCE: &str = "ED";
pub const WORD_MOVERS: &str = "WMD";
pub const PERPLEXITY: &str = "PPL";
pub const CLASS: &str = "Class";
pub const ENTROPY: &str = "Entropy";

/// Word-level Levenshtein distance with unit costs, case-sensitive.
pub fn edit_distance(a: &Sentence, b: &Sentence) -> usize {
    let (a, b) = (a.tokens(), b.tokens());
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut row = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            row[j + 1] = sub.min(prev[j + 1] + 1).min(row[j] + 1);
        }
        std::mem::swap(&mut prev, &mut row);
    }
    prev[b.len()]
}

/// `exp(-mean ln P(w_i | h_i))` over the lowercased words plus end-of-sentence.
pub fn perplexity(sentence: &Sentence, lm: &NGramLm) -> Result<f64, FeedbackError> {
    if sentence.is_empty() {
        return Err(FeedbackError::EmptyInput);
    }
    let inverse: Vec<f64> = lm
        .scoring_stream(sentence.words())
        .iter()
        .map(|(ctx, word)| lm.inverse_cond_prob_symbols(ctx, word))
        .collect();
    // A constant stream's perplexity is its inverse probability; returning it
    // directly avoids the rounding of exp(ln x).
    if inverse.iter().all(|&r| r == inverse[0]) {
        return Ok(inverse[0]);
    }
    let mean = inverse.iter().map(|r| r.ln()).sum::<f64>() / inverse.len() as f64;
    Ok(mean.exp())
}

/// Posterior probability of `target` given the sentence.
pub fn class_score(sentence: &Sentence, clf: &AttributeClassifier, target: &str) -> Result<f64, FeedbackError> {
    let y = clf
        .label_index(target)
        .ok_or_else(|| FeedbackError::Label(target.to_string()))?;
    Ok(clf.posterior(sentence)[y])
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> Result<f64, FeedbackError> {
    if p.is_empty() {
        return Err(FeedbackError::Distribution("empty vector".into()));
    }
    if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(FeedbackError::Distribution(format!("invalid component {bad}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(FeedbackError::Distribution(format!("components sum to {sum}")));
    }
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum();
    Ok(0.0 - h)
}

/// Leave-one-out salience scores for one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalienceVector {
    pub label: String,
    pub scores: Vec<f64>,
}

/// `S(X, i) = P(Y | X) - P(Y | X without word i)` for every position.
///
/// `target` defaults to the most probable label for the full sentence.
pub fn salience(
    sentence: &Sentence,
    clf: &AttributeClassifier,
    target: Option<&str>,
) -> Result<SalienceVector, FeedbackError> {
    if sentence.is_empty() {
        return Err(FeedbackError::EmptyInput);
    }
    let label = match target {
        Some(t) => t.to_string(),
        None => clf.labels()[clf.predict(sentence)].clone(),
    };
    let full = class_score(sentence, clf, &label)?;
    let scores = (0..sentence.len())
        .map(|i| class_score(&sentence.without(i), clf, &label).map(|p| full - p))
        .collect::<Result<_, _>>()?;
    Ok(SalienceVector { label, scores })
}

/// A pluggable scorer of an edited sentence against its original.
pub trait FeedbackProvider: Send + Sync {
    fn name(&self) -> &str;
    fn score(&self, original: &Sentence, edited: &Sentence) -> Result<f64, FeedbackError>;
}

pub struct EditDistanceProvider;

impl FeedbackProvider for EditDistanceProvider {
    fn name(&self) -> &str {
        EDIT_DISTANCE
    }

    fn score(&self, original: &Sentence, edited: &Sentence) -> Result<f64, FeedbackError> {
        Ok(edit_distance(original, edited) as f64)
    }
}

pub struct WmdProvider(pub Arc<EmbeddingTable>);

impl FeedbackProvider for WmdProvider {
    fn name(&self) -> &str {
        WORD_MOVERS
    }

    fn score(&self, original: &Sentence, edited: &Sentence) -> Result<f64, FeedbackError> {
        wmd(original, edited, &self.0)
    }
}

pub struct PerplexityProvider(pub Arc<NGramLm>);

impl FeedbackProvider for PerplexityProvider {
    fn name(&self) -> &str {
        PERPLEXITY
    }

    fn score(&self, _original: &Sentence, edited: &Sentence) -> Result<f64, FeedbackError> {
        perplexity(edited, &self.0)
    }
}

pub struct ClassProvider {
    pub classifier: Arc<AttributeClassifier>,
    pub target: String,
}

impl FeedbackProvider for ClassProvider {
    fn name(&self) -> &str {
        CLASS
    }

    fn score(&self, _original: &Sentence, edited: &Sentence) -> Result<f64, FeedbackError> {
        class_score(edited, &self.classifier, &self.target)
    }
}

/// Entropy of the classifier posterior on the edited sentence.
pub struct EntropyProvider(pub Arc<AttributeClassifier>);

impl FeedbackProvider for EntropyProvider {
    fn name(&self) -> &str {
        ENTROPY
    }

    fn score(&self, _original: &Sentence, edited: &Sentence) -> Result<f64, FeedbackError> {
        entropy(&self.0.posterior(edited))
    }
}

/// The models feedback providers can be built from.
#[derive(Clone, Default)]
pub struct ModelSet {
    pub embeddings: Option<Arc<EmbeddingTable>>,
    pub lm: Option<Arc<NGramLm>>,
    pub classifier: Option<Arc<AttributeClassifier>>,
}

/// Named providers; names are unique and are the keys of feedback snapshots.
#[derive(Default)]
pub struct FeedbackRegistry {
    providers: Vec<Box<dyn FeedbackProvider>>,
}

impl FeedbackRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, provider: Box<dyn FeedbackProvider>) -> Result<(), FeedbackError> {
        if self.providers.iter().any(|p| p.name() == provider.name()) {
            return Err(FeedbackError::Config(format!(
                "duplicate provider {:?}",
                provider.name()
            )));
        }
        self.providers.push(provider);
        Ok(())
    }

    /// Builds the standard providers named in `names`. `target` is the label
    /// scored by `Class`; it defaults to the classifier's first label.
    pub fn from_names<S: AsRef<str>>(
        names: &[S],
        models: &ModelSet,
        target: Option<&str>,
    ) -> Result<Self, FeedbackError> {
        let missing = |name: &str, model: &str| FeedbackError::Config(format!("provider {name} needs a {model} model"));
        let mut registry = Self::new();
        for name in names {
            let name = name.as_ref();
            let provider: Box<dyn FeedbackProvider> = match name {
                EDIT_DISTANCE => Box::new(EditDistanceProvider),
                WORD_MOVERS => Box::new(WmdProvider(
                    models.embeddings.clone().ok_or_else(|| missing(name, "embedding"))?,
                )),
                PERPLEXITY => Box::new(PerplexityProvider(
                    models.lm.clone().ok_or_else(|| missing(name, "language"))?,
                )),
                CLASS => {
                    let classifier = models.classifier.clone().ok_or_else(|| missing(name, "classifier"))?;
                    let target = match target {
                        Some(t) if classifier.label_index(t).is_some() => t.to_string(),
                        Some(t) => return Err(FeedbackError::Label(t.to_string())),
                        None => classifier.labels()[0].clone(),
                    };
                    Box::new(ClassProvider { classifier, target })
                }
                ENTROPY => Box::new(EntropyProvider(
                    models.classifier.clone().ok_or_else(|| missing(name, "classifier"))?,
                )),
                other => return Err(FeedbackError::Config(format!("unknown provider {other:?}"))),
            };
            registry.register(provider)?;
        }
        Ok(registry)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.providers.iter().map(|p| p.name())
    }

    pub fn len(&self) -> usize {
        self.providers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.providers.is_empty()
    }

    /// Scores with every provider. Failing providers (or non-finite scores)
    /// are recorded as `None` instead of failing the batch.
    pub fn score_all(&self, original: &Sentence, edited: &Sentence) -> FeedbackSnapshot {
        self.providers
            .iter()
            .map(|p| {
                let score = p.score(original, edited).ok().filter(|s| s.is_finite());
                (p.name().to_string(), score)
            })
            .collect()
    }
}
