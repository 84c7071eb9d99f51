use std::fmt;

use crate::error::{Error, Result};
use crate::keypad::{Alphabet, SPACE, SPACE_GLYPH};

/// The `n` most recent symbols, oldest first. Word-initial positions hold the space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    prefix: Vec<char>,
}

impl Context {
    pub fn new(prefix: Vec<char>) -> Result<Self> {
        if prefix.is_empty() {
            return Err(Error::validation("context length must be at least 1"));
        }
        let prefix = prefix
            .into_iter()
            .map(|c| if c == SPACE_GLYPH { SPACE } else { c })
            .collect();
        Ok(Context { prefix })
    }

    /// Parses a context written with `_` (or a blank) for the space.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(text.chars().collect())
    }

    /// An all-space context, as seen at the start of a text.
    pub fn start(n: usize) -> Self {
        Context {
            prefix: vec![SPACE; n.max(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.prefix
    }

    /// Slides the window: drops the oldest symbol and appends `symbol`.
    pub fn push(&mut self, symbol: char) {
        self.prefix.remove(0);
        self.prefix.push(if symbol == SPACE_GLYPH { SPACE } else { symbol });
    }

    /// Context digits, oldest first.
    pub fn digits(&self, alphabet: &Alphabet) -> Result<Vec<usize>> {
        self.prefix
            .iter()
            .map(|&c| {
                alphabet.digit(c).ok_or_else(|| {
                    Error::validation(format!(
                        "context symbol {c:?} is not in alphabet {}",
                        alphabet.id()
                    ))
                })
            })
            .collect()
    }

    /// Mixed-radix row index with the oldest symbol most significant.
    pub fn index(&self, alphabet: &Alphabet) -> Result<usize> {
        let radix = alphabet.radix();
        Ok(self
            .digits(alphabet)?
            .into_iter()
            .fold(0, |acc, d| acc * radix + d))
    }

    pub fn from_index(mut index: usize, n: usize, alphabet: &Alphabet) -> Result<Self> {
        let radix = alphabet.radix();
        let mut prefix = vec![SPACE; n];
        for slot in prefix.iter_mut().rev() {
            *slot = alphabet
                .symbol(index % radix)
                .ok_or_else(|| Error::Consistency("digit outside alphabet".into()))?;
            index /= radix;
        }
        if index != 0 {
            return Err(Error::validation("context index out of range"));
        }
        Ok(Context { prefix })
    }
}

impl fmt::Display for Context {
    /// Renders the space as `_`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.prefix {
            let c = if c == SPACE { SPACE_GLYPH } else { c };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
