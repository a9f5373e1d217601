use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::models::normalize;
use crate::token::tokenize;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

const FORMAT: &str = "alter-ngram-lm";
const VERSION: u32 = 1;

/// Add-alpha smoothed n-gram language model over lowercased words.
///
/// Sentences are padded with `order - 1` [`BOS`] symbols and one [`EOS`].
/// The vocabulary holds every training word plus [`UNK`] and [`EOS`];
/// [`BOS`] only ever appears in histories.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramLm {
    order: usize,
    alpha: f64,
    vocabulary: BTreeSet<String>,
    counts: BTreeMap<Vec<String>, BTreeMap<String, u64>>,
    history_totals: BTreeMap<Vec<String>, u64>,
}

#[derive(Serialize, Deserialize)]
struct CountRecord {
    history: Vec<String>,
    word: String,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct Serialized {
    format: String,
    version: u32,
    order: usize,
    alpha: f64,
    vocabulary: Vec<String>,
    counts: Vec<CountRecord>,
}

fn check_params(order: usize, alpha: f64) -> Result<(), ModelError> {
    if order == 0 {
        return Err(ModelError::Train("n-gram order must be at least 1".into()));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(ModelError::Train(format!("smoothing must be positive, got {alpha}")));
    }
    Ok(())
}

fn is_reserved(word: &str) -> bool {
    word == BOS || word == EOS || word == UNK
}

impl NGramLm {
    /// Counts n-grams over `texts`, each tokenized and lowercased.
    pub fn train<S: AsRef<str>>(texts: &[S], order: usize, alpha: f64) -> Result<Self, ModelError> {
        check_params(order, alpha)?;
        if texts.is_empty() {
            return Err(ModelError::Train("empty training corpus".into()));
        }
        let mut lm = Self::uniform(order, alpha, std::iter::empty::<&str>())?;
        for text in texts {
            let words: Vec<String> = tokenize(text.as_ref())
                .words()
                .map(|w| {
                    let w = normalize(w);
                    if is_reserved(&w) {
                        UNK.to_string()
                    } else {
                        w
                    }
                })
                .collect();
            lm.vocabulary.extend(words.iter().cloned());
            let stream = lm.padded(words);
            for window in stream.windows(order) {
                let (history, word) = window.split_at(order - 1);
                lm.add(history.to_vec(), word[0].clone(), 1);
            }
        }
        Ok(lm)
    }

    /// A model with the given vocabulary and no counts: every conditional is
    /// `1 / |V|`.
    pub fn uniform<I, S>(order: usize, alpha: f64, words: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        check_params(order, alpha)?;
        let mut vocabulary: BTreeSet<String> = [UNK.to_string(), EOS.to_string()].into();
        vocabulary.extend(words.into_iter().map(|w| normalize(w.as_ref())));
        vocabulary.remove(BOS);
        Ok(NGramLm {
            order,
            alpha,
            vocabulary,
            counts: BTreeMap::new(),
            history_totals: BTreeMap::new(),
        })
    }

    fn add(&mut self, history: Vec<String>, word: String, n: u64) {
        *self.history_totals.entry(history.clone()).or_default() += n;
        *self.counts.entry(history).or_default().entry(word).or_default() += n;
    }

    fn padded(&self, words: Vec<String>) -> Vec<String> {
        let mut stream = vec![BOS.to_string(); self.order - 1];
        stream.extend(words);
        stream.push(EOS.to_string());
        stream
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Vocabulary including [`UNK`] and [`EOS`], in lexicographic order.
    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.vocabulary.iter().map(String::as_str)
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Maps a word to its model symbol (lowercased or [`UNK`]). [`BOS`] and
    /// [`EOS`] pass through unchanged.
    pub fn symbol(&self, word: &str) -> String {
        if word == BOS || word == EOS {
            return word.to_string();
        }
        let w = normalize(word);
        if self.vocabulary.contains(&w) && w != UNK {
            w
        } else {
            UNK.to_string()
        }
    }

    /// Normalizes a history to exactly `order - 1` symbols: keeps the last
    /// words, left-padding with [`BOS`].
    pub fn context<S: AsRef<str>>(&self, history: &[S]) -> Vec<String> {
        let keep = self.order - 1;
        let tail = &history[history.len().saturating_sub(keep)..];
        let mut ctx = vec![BOS.to_string(); keep - tail.len()];
        ctx.extend(tail.iter().map(|w| self.symbol(w.as_ref())));
        ctx
    }

    pub fn count(&self, context: &[String], word: &str) -> u64 {
        self.counts.get(context).and_then(|c| c.get(word)).copied().unwrap_or(0)
    }

    pub fn history_total(&self, context: &[String]) -> u64 {
        self.history_totals.get(context).copied().unwrap_or(0)
    }

    /// `(c(h, w) + alpha) / (c(h) + alpha * |V|)` after mapping to symbols.
    pub fn cond_prob<S: AsRef<str>>(&self, history: &[S], word: &str) -> f64 {
        let ctx = self.context(history);
        self.cond_prob_symbols(&ctx, &self.symbol(word))
    }

    pub(crate) fn cond_prob_symbols(&self, context: &[String], symbol: &str) -> f64 {
        let (num, den) = self.scaled_terms(context, symbol);
        num / den
    }

    /// `1 / cond_prob`, computed as one division.
    pub(crate) fn inverse_cond_prob_symbols(&self, context: &[String], symbol: &str) -> f64 {
        let (num, den) = self.scaled_terms(context, symbol);
        den / num
    }

    /// Numerator and denominator divided through by alpha, so zero counts
    /// give exactly `1 / |V|`.
    fn scaled_terms(&self, context: &[String], symbol: &str) -> (f64, f64) {
        let num = self.count(context, symbol) as f64 / self.alpha + 1.0;
        let den = self.history_total(context) as f64 / self.alpha + self.vocab_size() as f64;
        (num, den)
    }

    /// Lowercased word symbols of `words` followed by [`EOS`], each paired
    /// with its padded history.
    pub(crate) fn scoring_stream<'a, I>(&self, words: I) -> Vec<(Vec<String>, String)>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let symbols: Vec<String> = words
            .into_iter()
            .map(|w| {
                if is_reserved(w) {
                    UNK.to_string()
                } else {
                    self.symbol(w)
                }
            })
            .collect();
        let stream = self.padded(symbols);
        stream
            .windows(self.order)
            .map(|w| (w[..self.order - 1].to_vec(), w[self.order - 1].clone()))
            .collect()
    }

    pub fn save<W: Write>(&self, out: W) -> Result<(), ModelError> {
        let ser = Serialized {
            format: FORMAT.into(),
            version: VERSION,
            order: self.order,
            alpha: self.alpha,
            vocabulary: self.vocabulary.iter().cloned().collect(),
            counts: self
                .counts
                .iter()
                .flat_map(|(h, ws)| {
                    ws.iter().map(move |(w, c)| CountRecord {
                        history: h.clone(),
                        word: w.clone(),
                        count: *c,
                    })
                })
                .collect(),
        };
        serde_json::to_writer_pretty(out, &ser).map_err(|e| ModelError::format(0, e.to_string()))
    }

    pub fn load<R: Read>(input: R) -> Result<Self, ModelError> {
        let ser: Serialized =
            serde_json::from_reader(input).map_err(|e| ModelError::format(e.line(), e.to_string()))?;
        if ser.format != FORMAT || ser.version != VERSION {
            return Err(ModelError::format(
                0,
                format!("unsupported model {} v{}", ser.format, ser.version),
            ));
        }
        check_params(ser.order, ser.alpha).map_err(|e| ModelError::format(0, e.to_string()))?;
        let mut lm = Self::uniform(ser.order, ser.alpha, &ser.vocabulary)?;
        for rec in ser.counts {
            if rec.history.len() != ser.order - 1 || !lm.vocabulary.contains(&rec.word) {
                return Err(ModelError::format(
                    0,
                    format!(
                        "count record {:?} -> {:?} does not fit the model",
                        rec.history, rec.word
                    ),
                ));
            }
            lm.add(rec.history, rec.word, rec.count);
        }
        Ok(lm)
    }
}
