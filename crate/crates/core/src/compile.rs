//! Bakes a fitted model into a full reordering table and checks tables.

use std::fmt;

use serde::Serialize;

use crate::bbn::Model;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::keypad::{Key, KeypadLayout};
use crate::perm::{code_count, decode_permutation, encode_permutation, PermutationCode};
use crate::table::{RawRow, ReorderingTable};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompileReport {
    pub rows_written: usize,
    /// Rows where at least one key was answered by a fallback level or the static order.
    pub contexts_fallback: usize,
    /// Per key (2..9), how often each one-based code was written; index 0 is code 1.
    pub code_histogram: Vec<Vec<u64>>,
}

fn same_layout(a: &KeypadLayout, b: &KeypadLayout) -> bool {
    a.alphabet() == b.alphabet() && Key::all().all(|k| a.group(k) == b.group(k))
}

/// Queries the model for every context (mixed-radix order) and key.
pub fn compile_table(model: &Model, layout: &KeypadLayout, n: usize) -> Result<(ReorderingTable, CompileReport)> {
    if !same_layout(model.layout(), layout) {
        return Err(Error::validation(format!(
            "model was trained for layout {}, not {}",
            model.layout().name(),
            layout.name()
        )));
    }
    if n != model.context_len() {
        return Err(Error::validation(format!(
            "model uses {} preceding symbols, asked for {n}",
            model.context_len()
        )));
    }
    let alphabet = layout.alphabet();
    let full = alphabet
        .radix()
        .checked_pow(n as u32)
        .filter(|&f| f <= u32::MAX as usize)
        .ok_or_else(|| Error::validation("table would exceed 2^32 rows"))?;
    let mut histogram: Vec<Vec<u64>> = Key::all()
        .map(|k| vec![0; code_count(layout.group_size(k) as u8).unwrap_or(0) as usize])
        .collect();
    let mut rows = Vec::with_capacity(full);
    let mut fallback_rows = 0;
    for index in 0..full {
        let ctx = Context::from_index(index, n, alphabet)?;
        let mut row: RawRow = [0; Key::COUNT];
        let mut used_fallback = false;
        for key in Key::all() {
            let (order, source) = model.rank_with_source(&ctx, key)?;
            used_fallback |= source.is_fallback();
            let code = encode_permutation(&order)?;
            row[key.index()] = (code.value() - 1) as u8;
            histogram[key.index()][code.value() as usize - 1] += 1;
        }
        fallback_rows += used_fallback as usize;
        rows.push(row);
    }
    let table = ReorderingTable::from_rows(alphabet, n, rows)?;
    let report = CompileReport {
        rows_written: full,
        contexts_fallback: fallback_rows,
        code_histogram: histogram,
    };
    Ok((table, report))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    AlphabetMismatch { table: String, layout: String },
    RowCount { expected: usize, found: usize },
    CodeRange { row: usize, context: String, key: u8, code: u16, max: u16 },
    NotAPermutation { row: usize, context: String, key: u8, code: u16 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AlphabetMismatch { table, layout } => {
                write!(f, "table alphabet {table} does not match layout {layout}")
            }
            Violation::RowCount { expected, found } => {
                write!(f, "expected {expected} rows, found {found}")
            }
            Violation::CodeRange { row, context, key, code, max } => {
                write!(f, "row {row} [{context}] key {key}: code {code} outside 1..={max}")
            }
            Violation::NotAPermutation { row, context, key, code } => {
                write!(f, "row {row} [{context}] key {key}: code {code} does not decode to a permutation")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub rows_checked: usize,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_table(table: &ReorderingTable, layout: &KeypadLayout) -> VerifyReport {
    let mut report = VerifyReport::default();
    if !table.matches(layout) {
        report.violations.push(Violation::AlphabetMismatch {
            table: table.alphabet_id().into(),
            layout: layout.alphabet().id().into(),
        });
        return report;
    }
    let expected = table.full_row_count().unwrap_or(usize::MAX);
    if table.row_count() != expected {
        report.violations.push(Violation::RowCount {
            expected,
            found: table.row_count(),
        });
    }
    let alphabet = layout.alphabet();
    for (row, raw) in table.rows().iter().enumerate() {
        for key in Key::all() {
            let size = layout.group_size(key) as u8;
            let code = raw[key.index()] as u16 + 1;
            let context = || {
                Context::from_index(row, table.context_len(), alphabet)
                    .map(|c| c.to_string())
                    .unwrap_or_default()
            };
            match PermutationCode::new(code, size) {
                Err(_) => report.violations.push(Violation::CodeRange {
                    row,
                    context: context(),
                    key: key.digit(),
                    code,
                    max: code_count(size).unwrap_or(0),
                }),
                Ok(c) => {
                    let mut order = decode_permutation(c);
                    order.sort_unstable();
                    if order != (1..=size).collect::<Vec<_>>() {
                        report.violations.push(Violation::NotAPermutation {
                            row,
                            context: context(),
                            key: key.digit(),
                            code,
                        });
                    }
                }
            }
        }
        report.rows_checked += 1;
    }
    report
}
