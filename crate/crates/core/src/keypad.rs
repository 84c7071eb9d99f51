//! Alphabets, phone-style key labels and the static letter grouping of a keypad.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Internal representation of the word-boundary symbol.
pub const SPACE: char = ' ';
/// How the word-boundary symbol is written in table documents and CSV dumps.
pub const SPACE_GLYPH: char = '_';

pub const GREEK_CAPS: &str = "greek-caps";
pub const LATIN_CAPS: &str = "latin-caps";

/// Ordered set of letter symbols plus a dedicated space symbol.
///
/// Symbols are addressed by a *digit*: `0` is the space, `1..=y` the letters in
/// alphabet order. Digits are what the reordering table uses as mixed-radix
/// context coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    id: String,
    symbols: Vec<char>,
    space: char,
    digits: HashMap<char, usize>,
}

impl Alphabet {
    pub fn new(id: impl Into<String>, symbols: Vec<char>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() || id.len() > u8::MAX as usize {
            return Err(Error::validation("alphabet id must be 1..=255 bytes"));
        }
        if symbols.len() < 2 {
            return Err(Error::validation(format!(
                "alphabet needs at least 2 symbols, got {}",
                symbols.len()
            )));
        }
        if symbols.len() > u16::MAX as usize - 1 {
            return Err(Error::validation("alphabet too large"));
        }
        let mut digits = HashMap::with_capacity(symbols.len() + 1);
        digits.insert(SPACE, 0);
        for (i, &c) in symbols.iter().enumerate() {
            if c == SPACE || c == SPACE_GLYPH {
                return Err(Error::validation(format!(
                    "symbol {c:?} is reserved for the space"
                )));
            }
            if digits.insert(c, i + 1).is_some() {
                return Err(Error::validation(format!("duplicate symbol {c:?}")));
            }
        }
        Ok(Alphabet {
            id,
            symbols,
            space: SPACE,
            digits,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn space(&self) -> char {
        self.space
    }

    /// Number of letters, excluding the space.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Letters plus the space: the radix of one context position.
    pub fn radix(&self) -> usize {
        self.symbols.len() + 1
    }

    pub fn contains(&self, c: char) -> bool {
        c != SPACE && self.digits.contains_key(&c)
    }

    /// Context digit of `c`, accepting the space in either spelling.
    pub fn digit(&self, c: char) -> Option<usize> {
        if c == SPACE_GLYPH {
            return Some(0);
        }
        self.digits.get(&c).copied()
    }

    pub fn symbol(&self, digit: usize) -> Option<char> {
        match digit {
            0 => Some(self.space),
            d => self.symbols.get(d - 1).copied(),
        }
    }
}

/// One of the eight symbol-bearing keys, `2` through `9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key(u8);

impl Key {
    pub const COUNT: usize = 8;

    pub fn new(digit: u8) -> Result<Self> {
        if (2..=9).contains(&digit) {
            Ok(Key(digit))
        } else {
            Err(Error::validation(format!(
                "key {digit} carries no symbols (expected 2..9)"
            )))
        }
    }

    pub fn from_index(index: usize) -> Result<Self> {
        if index < Self::COUNT {
            Ok(Key(index as u8 + 2))
        } else {
            Err(Error::validation(format!("key index {index} out of range")))
        }
    }

    pub fn all() -> impl Iterator<Item = Key> {
        (2..=9).map(Key)
    }

    pub fn digit(self) -> u8 {
        self.0
    }

    /// Zero-based position among the eight keys.
    pub fn index(self) -> usize {
        (self.0 - 2) as usize
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::str::FromStr for Key {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().parse::<u8>() {
            Ok(d) => Key::new(d),
            Err(_) => Err(Error::validation(format!("unknown key label {s:?}"))),
        }
    }
}

/// Static assignment of the alphabet onto keys 2..9.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeypadLayout {
    name: String,
    alphabet: Alphabet,
    groups: Vec<Vec<char>>,
    next_key: char,
    // symbol -> (key, 1-based position in the static group)
    placement: HashMap<char, (Key, u8)>,
}

impl KeypadLayout {
    /// Builds a layout from eight groups, listed for keys 2..9 in order.
    pub fn new(name: impl Into<String>, alphabet: Alphabet, groups: Vec<Vec<char>>) -> Result<Self> {
        if groups.len() != Key::COUNT {
            return Err(Error::validation(format!(
                "expected {} key groups, got {}",
                Key::COUNT,
                groups.len()
            )));
        }
        let mut placement = HashMap::with_capacity(alphabet.len());
        for (i, group) in groups.iter().enumerate() {
            let key = Key::from_index(i)?;
            if !(3..=4).contains(&group.len()) {
                return Err(Error::validation(format!(
                    "key {key} has {} symbols (expected 3 or 4)",
                    group.len()
                )));
            }
            for (pos, &c) in group.iter().enumerate() {
                if !alphabet.contains(c) {
                    return Err(Error::validation(format!(
                        "key {key} symbol {c:?} is not in alphabet {}",
                        alphabet.id()
                    )));
                }
                if placement.insert(c, (key, pos as u8 + 1)).is_some() {
                    return Err(Error::validation(format!("symbol {c:?} placed twice")));
                }
            }
        }
        if let Some(&missing) = alphabet.symbols().iter().find(|c| !placement.contains_key(c)) {
            return Err(Error::validation(format!(
                "symbol {missing:?} is not on any key"
            )));
        }
        Ok(KeypadLayout {
            name: name.into(),
            alphabet,
            groups,
            next_key: '#',
            placement,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn next_key(&self) -> char {
        self.next_key
    }

    /// Static base order of the symbols on `key`.
    pub fn group(&self, key: Key) -> &[char] {
        &self.groups[key.index()]
    }

    pub fn group_size(&self, key: Key) -> usize {
        self.groups[key.index()].len()
    }

    pub fn max_group_size(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Key and 1-based static position of a letter.
    pub fn locate(&self, symbol: char) -> Option<(Key, u8)> {
        self.placement.get(&symbol).copied()
    }

    /// The letter at 1-based `state` on `key`.
    pub fn resolve(&self, key: Key, state: u8) -> Option<char> {
        let group = self.group(key);
        (state as usize)
            .checked_sub(1)
            .and_then(|i| group.get(i))
            .copied()
    }
}

/// Returns one of the builtin layouts by name.
pub fn builtin_layout(name: &str) -> Result<KeypadLayout> {
    let (symbols, groups): (&str, [&str; 8]) = match name {
        GREEK_CAPS => (
            "ΑΒΓΔΕΖΗΘΙΚΛΜΝΞΟΠΡΣΤΥΦΧΨΩ",
            ["ΑΒΓ", "ΔΕΖ", "ΗΘΙ", "ΚΛΜ", "ΝΞΟ", "ΠΡΣ", "ΤΥΦ", "ΧΨΩ"],
        ),
        LATIN_CAPS => (
            "ABCDEFGHIJKLMNOPQRSTUVWXYZ",
            ["ABC", "DEF", "GHI", "JKL", "MNO", "PQRS", "TUV", "WXYZ"],
        ),
        other => {
            return Err(Error::Config(format!(
                "unknown layout {other:?} (expected {GREEK_CAPS} or {LATIN_CAPS})"
            )))
        }
    };
    let alphabet = Alphabet::new(name, symbols.chars().collect())?;
    let groups = groups.iter().map(|g| g.chars().collect()).collect();
    KeypadLayout::new(name, alphabet, groups)
}
