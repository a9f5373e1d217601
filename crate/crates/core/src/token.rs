//! Tokens, sentences and the whitespace/punctuation tokenizer.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::EditError;

/// Punctuation characters split off the edges of whitespace-delimited chunks.
pub const DETACHABLE_PUNCTUATION: &[char] = &['.', ',', '!', '?', ';', ':', '\'', '"', '(', ')'];

fn is_detachable(c: char) -> bool {
    DETACHABLE_PUNCTUATION.contains(&c)
}

/// A single word or punctuation mark. Never empty, never contains whitespace.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn new(surface: impl Into<String>) -> Result<Self, EditError> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(EditError::InvalidToken(surface));
        }
        Ok(Token(surface))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = EditError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Token::new(value)
    }
}

impl From<Token> for String {
    fn from(token: Token) -> Self {
        token.0
    }
}

impl Deref for Token {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.0, f)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An ordered token sequence; the unit being rewritten. May be empty.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    /// Builds a sentence from surfaces, rejecting empty or whitespace-bearing ones.
    pub fn from_words<I, S>(words: I) -> Result<Self, EditError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        words
            .into_iter()
            .map(Token::new)
            .collect::<Result<Vec<_>, _>>()
            .map(Sentence::new)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<Token> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(Token::as_str)
    }

    /// The sentence with the token at `index` removed.
    pub fn without(&self, index: usize) -> Sentence {
        let mut tokens = self.tokens.clone();
        tokens.remove(index);
        Sentence { tokens }
    }

    pub fn text(&self) -> String {
        detokenize(self)
    }
}

impl fmt::Debug for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.tokens).finish()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&detokenize(self))
    }
}

impl From<Vec<Token>> for Sentence {
    fn from(tokens: Vec<Token>) -> Self {
        Sentence::new(tokens)
    }
}

/// Splits on whitespace, then peels punctuation from [`DETACHABLE_PUNCTUATION`]
/// off both edges of every chunk, one token per character. Case is preserved.
pub fn tokenize(text: &str) -> Sentence {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let start = chunk.trim_start_matches(is_detachable);
        let leading = &chunk[..chunk.len() - start.len()];
        let core = start.trim_end_matches(is_detachable);
        let trailing = &start[core.len()..];

        tokens.extend(leading.chars().map(|c| Token(c.to_string())));
        if !core.is_empty() {
            tokens.push(Token(core.to_string()));
        }
        tokens.extend(trailing.chars().map(|c| Token(c.to_string())));
    }
    Sentence { tokens }
}

/// Joins tokens with single spaces.
pub fn detokenize(sentence: &Sentence) -> String {
    let mut out = String::new();
    for (i, token) in sentence.tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}
