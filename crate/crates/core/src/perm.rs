//! Single-number codes for the order in which a key's letters are offered.
//!
//! An order is a permutation of the 1-based static positions of a group,
//! listed best candidate first. Three-letter groups use the fixed digit table
//! `123→1 132→2 213→3 231→4 312→5 321→6`; four-letter groups use the
//! lexicographic rank `1..=24`, identity first.

use std::fmt;

use crate::error::{Error, Result};

const THREE_LETTER_DIGITS: [[u8; 3]; 6] = [
    [1, 2, 3],
    [1, 3, 2],
    [2, 1, 3],
    [2, 3, 1],
    [3, 1, 2],
    [3, 2, 1],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PermutationCode {
    value: u16,
    group_size: u8,
}

impl PermutationCode {
    pub fn new(value: u16, group_size: u8) -> Result<Self> {
        let max = code_count(group_size)?;
        if value == 0 || value > max {
            return Err(Error::validation(format!(
                "code {value} out of range 1..={max} for a group of {group_size}"
            )));
        }
        Ok(PermutationCode { value, group_size })
    }

    /// The identity order for a group.
    pub fn identity(group_size: u8) -> Result<Self> {
        Self::new(1, group_size)
    }

    pub fn value(self) -> u16 {
        self.value
    }

    pub fn group_size(self) -> u8 {
        self.group_size
    }
}

impl fmt::Display for PermutationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Number of distinct codes for a group size.
pub fn code_count(group_size: u8) -> Result<u16> {
    match group_size {
        3 => Ok(6),
        4 => Ok(24),
        k => Err(Error::validation(format!(
            "unsupported group size {k} (expected 3 or 4)"
        ))),
    }
}

fn check_permutation(order: &[u8]) -> Result<()> {
    let k = order.len();
    let mut seen = [false; 5];
    for &p in order {
        if p == 0 || p as usize > k || seen[p as usize] {
            return Err(Error::validation(format!(
                "{order:?} is not a permutation of 1..={k}"
            )));
        }
        seen[p as usize] = true;
    }
    Ok(())
}

pub fn encode_permutation(order: &[u8]) -> Result<PermutationCode> {
    let k = order.len();
    code_count(k as u8)?;
    check_permutation(order)?;
    let value = if k == 3 {
        THREE_LETTER_DIGITS
            .iter()
            .position(|row| row == order)
            .map(|i| i as u16 + 1)
            .ok_or_else(|| Error::Consistency(format!("{order:?} missing from digit table")))?
    } else {
        lexicographic_rank(order) + 1
    };
    PermutationCode::new(value, k as u8)
}

pub fn decode_permutation(code: PermutationCode) -> Vec<u8> {
    match code.group_size {
        3 => THREE_LETTER_DIGITS[code.value as usize - 1].to_vec(),
        k => lexicographic_unrank(code.value - 1, k),
    }
}

// Lehmer code: for each position, count smaller elements to its right.
fn lexicographic_rank(order: &[u8]) -> u16 {
    let k = order.len();
    let mut rank = 0u16;
    for i in 0..k {
        let smaller = order[i + 1..].iter().filter(|&&x| x < order[i]).count() as u16;
        rank += smaller * factorial(k - 1 - i);
    }
    rank
}

fn lexicographic_unrank(mut rank: u16, k: u8) -> Vec<u8> {
    let mut pool: Vec<u8> = (1..=k).collect();
    let mut out = Vec::with_capacity(k as usize);
    for i in (0..k as usize).rev() {
        let f = factorial(i);
        let idx = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(idx));
    }
    out
}

fn factorial(n: usize) -> u16 {
    (1..=n as u16).product()
}
