//! Server configuration: a flat `key=value` file plus environment overrides.
//!
//! ```text
//! listen = 127.0.0.1:8080
//! store = ./data
//! embeddings = vectors.txt          # word v1 v2 ... per line
//! lm = model.lm.json                # or lm_corpus = sentences.txt
//! classifier = model.nb.json        # or classifier_corpus = labelled.tsv
//! providers = ED,WMD,PPL,Class,Entropy
//! k = 10
//! ```
//!
//! Relative paths are resolved against the directory of the config file.
//! `ALTER_LISTEN` and `ALTER_STORE` override `listen` and `store`.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use alter_core::feedback::{FeedbackRegistry, ModelSet};
use alter_core::models::{AttributeClassifier, EmbeddingTable, LabeledCorpus, NGramLm};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {message}")]
    Syntax { path: String, line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot load {path}: {message}")]
    Model { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub listen: String,
    pub store: PathBuf,
    pub embeddings: Option<PathBuf>,
    pub lm: Option<PathBuf>,
    pub lm_corpus: Option<PathBuf>,
    pub lm_order: usize,
    pub lm_alpha: f64,
    pub classifier: Option<PathBuf>,
    pub classifier_corpus: Option<PathBuf>,
    pub classifier_beta: f64,
    /// Providers used for tasks that do not name their own.
    pub providers: Vec<String>,
    pub k: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen: "127.0.0.1:8080".into(),
            store: PathBuf::from("data"),
            embeddings: None,
            lm: None,
            lm_corpus: None,
            lm_order: 3,
            lm_alpha: 1.0,
            classifier: None,
            classifier_corpus: None,
            classifier_beta: 1.0,
            providers: vec!["ED".into()],
            k: 10,
        }
    }
}

impl Config {
    pub fn parse(text: &str, base: &Path, origin: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        let syntax = |line: usize, message: String| ConfigError::Syntax {
            path: origin.to_string(),
            line,
            message,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(i + 1, "expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let path = || Some(base.join(value));
            let number = |what: &str| syntax(i + 1, format!("{key}: expected {what}, got {value:?}"));
            match key {
                "listen" => cfg.listen = value.into(),
                "store" => cfg.store = base.join(value),
                "embeddings" => cfg.embeddings = path(),
                "lm" => cfg.lm = path(),
                "lm_corpus" => cfg.lm_corpus = path(),
                "lm_order" => cfg.lm_order = value.parse().map_err(|_| number("an integer"))?,
                "lm_alpha" => cfg.lm_alpha = value.parse().map_err(|_| number("a number"))?,
                "classifier" => cfg.classifier = path(),
                "classifier_corpus" => cfg.classifier_corpus = path(),
                "classifier_beta" => cfg.classifier_beta = value.parse().map_err(|_| number("a number"))?,
                "providers" => {
                    cfg.providers = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect()
                }
                "k" => cfg.k = value.parse().map_err(|_| number("an integer"))?,
                other => return Err(syntax(i + 1, format!("unknown key {other:?}"))),
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Config, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, &path.display().to_string())
    }

    pub fn apply_env(&mut self) {
        if let Ok(listen) = std::env::var("ALTER_LISTEN") {
            self.listen = listen;
        }
        if let Ok(store) = std::env::var("ALTER_STORE") {
            self.store = PathBuf::from(store);
        }
    }

    /// Loads or trains every configured model and checks that the default
    /// providers can be built from them.
    pub fn load_models(&self) -> Result<ModelSet, ConfigError> {
        if self.lm.is_some() && self.lm_corpus.is_some() {
            return Err(ConfigError::Invalid("set either lm or lm_corpus, not both".into()));
        }
        if self.classifier.is_some() && self.classifier_corpus.is_some() {
            return Err(ConfigError::Invalid(
                "set either classifier or classifier_corpus, not both".into(),
            ));
        }
        let mut models = ModelSet::default();
        if let Some(p) = &self.embeddings {
            models.embeddings = Some(Arc::new(load(p, |f| EmbeddingTable::load(BufReader::new(f)))?));
        }
        if let Some(p) = &self.lm {
            models.lm = Some(Arc::new(load(p, NGramLm::load)?));
        }
        if let Some(p) = &self.lm_corpus {
            let text = read(p)?;
            let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
            let lm = NGramLm::train(&lines, self.lm_order, self.lm_alpha).map_err(|e| model_err(p, e))?;
            models.lm = Some(Arc::new(lm));
        }
        if let Some(p) = &self.classifier {
            models.classifier = Some(Arc::new(load(p, AttributeClassifier::load)?));
        }
        if let Some(p) = &self.classifier_corpus {
            let corpus = load(p, |f| LabeledCorpus::parse_tsv(BufReader::new(f)))?;
            let clf = AttributeClassifier::train(&corpus, self.classifier_beta).map_err(|e| model_err(p, e))?;
            models.classifier = Some(Arc::new(clf));
        }
        FeedbackRegistry::from_names(&self.providers, &models, None)
            .map_err(|e| ConfigError::Invalid(format!("providers: {e}")))?;
        Ok(models)
    }
}

fn model_err(path: &Path, e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Model {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|e| model_err(path, e))
}

fn load<T, E: std::fmt::Display>(path: &Path, f: impl FnOnce(File) -> Result<T, E>) -> Result<T, ConfigError> {
    let file = File::open(path).map_err(|e| model_err(path, e))?;
    f(file).map_err(|e| model_err(path, e))
}
