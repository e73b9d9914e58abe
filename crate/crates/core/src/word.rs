use std::fmt;

use serde::{Deserialize, Serialize};

use crate::nfa::Symbol;

/// A finite word over a small alphabet. The empty word is allowed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(symbols: Vec<Symbol>) -> Self {
        Self(symbols)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }

    /// Renders the word for output: one digit per symbol when the alphabet
    /// has at most ten symbols, dot-separated ids otherwise.
    pub fn render(&self, sigma: usize) -> String {
        if sigma <= 10 {
            self.0.iter().map(|&b| char::from(b'0' + b)).collect()
        } else {
            self.0
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }

    /// Inverse of [`Word::render`].
    pub fn parse(text: &str, sigma: usize) -> Option<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Some(Self::empty());
        }
        let symbols: Option<Vec<Symbol>> = if sigma <= 10 {
            text.chars()
                .map(|c| c.to_digit(10).map(|d| d as Symbol))
                .collect()
        } else {
            text.split('.').map(|s| s.parse::<Symbol>().ok()).collect()
        };
        let symbols = symbols?;
        symbols
            .iter()
            .all(|&b| (b as usize) < sigma)
            .then_some(Self(symbols))
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Self(v)
    }
}

impl From<&[Symbol]> for Word {
    fn from(v: &[Symbol]) -> Self {
        Self(v.to_vec())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("λ")
        } else {
            f.write_str(&self.render(if self.0.iter().all(|&b| b < 10) {
                10
            } else {
                256
            }))
        }
    }
}
