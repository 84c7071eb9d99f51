//! The reordering table and its on-disk formats.
//!
//! Binary layout (all integers little-endian):
//!
//! | field        | size            |
//! |--------------|-----------------|
//! | magic `IPRT` | 4               |
//! | version = 1  | 1               |
//! | id length    | 1               |
//! | alphabet id  | id length, UTF-8|
//! | n            | 1               |
//! | y            | 2               |
//! | row count    | 4               |
//! | rows         | 8 × row count   |
//!
//! Rows are stored in ascending mixed-radix context order; byte `i` of a row
//! is the zero-based permutation code for key `2 + i`.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::keypad::{Alphabet, Key, KeypadLayout};
use crate::perm::{decode_permutation, PermutationCode};

pub const MAGIC: &[u8; 4] = b"IPRT";
pub const VERSION: u8 = 1;

/// Raw per-key codes of one context row, zero-based as stored on disk.
pub type RawRow = [u8; Key::COUNT];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReorderingTable {
    alphabet_id: String,
    y: u16,
    n: u8,
    rows: Vec<RawRow>,
}

impl ReorderingTable {
    /// A table with no rows; every lookup falls back to the static order.
    pub fn empty(alphabet: &Alphabet, n: usize) -> Result<Self> {
        Self::from_rows(alphabet, n, Vec::new())
    }

    pub fn from_rows(alphabet: &Alphabet, n: usize, rows: Vec<RawRow>) -> Result<Self> {
        if n == 0 || n > u8::MAX as usize {
            return Err(Error::validation(format!("context length {n} out of range")));
        }
        let table = ReorderingTable {
            alphabet_id: alphabet.id().to_owned(),
            y: alphabet.len() as u16,
            n: n as u8,
            rows,
        };
        if let Some(full) = table.full_row_count() {
            if table.rows.len() > full {
                return Err(Error::validation(format!(
                    "{} rows exceed the {full} possible contexts",
                    table.rows.len()
                )));
            }
        }
        Ok(table)
    }

    pub fn alphabet_id(&self) -> &str {
        &self.alphabet_id
    }

    /// Number of letters in the table's alphabet.
    pub fn alphabet_len(&self) -> usize {
        self.y as usize
    }

    pub fn context_len(&self) -> usize {
        self.n as usize
    }

    pub fn rows(&self) -> &[RawRow] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut Vec<RawRow> {
        &mut self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// `(y+1)^n`, or `None` when that does not fit in memory addressing.
    pub fn full_row_count(&self) -> Option<usize> {
        (self.y as usize + 1).checked_pow(self.n as u32)
    }

    pub fn matches(&self, layout: &KeypadLayout) -> bool {
        let a = layout.alphabet();
        self.alphabet_id == a.id() && self.y as usize == a.len()
    }

    fn check_layout(&self, layout: &KeypadLayout) -> Result<()> {
        if self.matches(layout) {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "table alphabet {} (y={}) does not match layout alphabet {} (y={})",
                self.alphabet_id,
                self.y,
                layout.alphabet().id(),
                layout.alphabet().len()
            )))
        }
    }

    /// The stored code for `key` in `row`, or `None` if the row is absent.
    pub fn code(&self, layout: &KeypadLayout, row: usize, key: Key) -> Result<Option<PermutationCode>> {
        let Some(raw) = self.rows.get(row) else {
            return Ok(None);
        };
        let code = PermutationCode::new(raw[key.index()] as u16 + 1, layout.group_size(key) as u8)?;
        Ok(Some(code))
    }

    /// The symbols of `key` in the order they are offered after `ctx`.
    ///
    /// Contexts without a stored row get the key's static order.
    pub fn lookup(&self, layout: &KeypadLayout, ctx: &Context, key: Key) -> Result<Vec<char>> {
        self.check_layout(layout)?;
        if ctx.len() != self.n as usize {
            return Err(Error::validation(format!(
                "context {ctx} has length {}, table expects {}",
                ctx.len(),
                self.n
            )));
        }
        let row = ctx.index(layout.alphabet())?;
        let group = layout.group(key);
        match self.code(layout, row, key)? {
            None => Ok(group.to_vec()),
            Some(code) => Ok(decode_permutation(code)
                .into_iter()
                .map(|pos| group[pos as usize - 1])
                .collect()),
        }
    }

    pub fn write_binary(&self) -> Vec<u8> {
        let id = self.alphabet_id.as_bytes();
        let mut out = Vec::with_capacity(13 + id.len() + self.rows.len() * Key::COUNT);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(id.len() as u8);
        out.extend_from_slice(id);
        out.push(self.n);
        out.extend_from_slice(&self.y.to_le_bytes());
        out.extend_from_slice(&(self.rows.len() as u32).to_le_bytes());
        for row in &self.rows {
            out.extend_from_slice(row);
        }
        out
    }

    pub fn read_binary(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::format(0, "bad magic"));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::format(4, format!("unsupported version {version}")));
        }
        let id_len = r.u8()? as usize;
        let id_at = r.pos;
        let id = std::str::from_utf8(r.take(id_len)?)
            .map_err(|e| Error::format(id_at + e.valid_up_to(), "alphabet id is not UTF-8"))?
            .to_owned();
        if id.is_empty() {
            return Err(Error::format(id_at, "empty alphabet id"));
        }
        let n_at = r.pos;
        let n = r.u8()?;
        if n == 0 {
            return Err(Error::format(n_at, "context length 0"));
        }
        let y_at = r.pos;
        let y = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
        if y < 2 {
            return Err(Error::format(y_at, format!("alphabet size {y} below 2")));
        }
        let count_at = r.pos;
        let count = u32::from_le_bytes(r.take(4)?.try_into().unwrap()) as usize;
        let full = (y as usize + 1).checked_pow(n as u32);
        if full.is_some_and(|full| count > full) {
            return Err(Error::format(
                count_at,
                format!("row count {count} exceeds (y+1)^n"),
            ));
        }
        let body_at = r.pos;
        let expected = count
            .checked_mul(Key::COUNT)
            .ok_or_else(|| Error::format(count_at, "row count overflows"))?;
        let remaining = bytes.len() - body_at;
        if remaining != expected {
            let at = body_at + remaining.min(expected);
            return Err(Error::format(
                at,
                format!("row data is {remaining} bytes, header promises {expected}"),
            ));
        }
        let rows = bytes[body_at..]
            .chunks_exact(Key::COUNT)
            .map(|c| c.try_into().unwrap())
            .collect();
        Ok(ReorderingTable {
            alphabet_id: id,
            y,
            n,
            rows,
        })
    }

    pub fn export_json(&self, layout: &KeypadLayout) -> Result<String> {
        self.check_layout(layout)?;
        let keypad = Key::all()
            .map(|k| {
                let group = layout.group(k).iter().map(char::to_string).collect();
                (k.to_string(), group)
            })
            .collect();
        let mut rows = IndexMap::with_capacity(self.rows.len());
        for (i, raw) in self.rows.iter().enumerate() {
            let ctx = Context::from_index(i, self.n as usize, layout.alphabet())?;
            let codes: Vec<u16> = raw.iter().map(|&b| b as u16 + 1).collect();
            rows.insert(ctx.to_string(), codes);
        }
        let doc = TableDocument {
            alphabet: self.alphabet_id.clone(),
            n: self.n,
            keypad,
            rows,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Inverse of [`export_json`](Self::export_json).
    ///
    /// The layout is rebuilt from the document's keypad; its alphabet order is
    /// the concatenation of the groups for keys 2..9.
    pub fn import_json(text: &str) -> Result<(Self, KeypadLayout)> {
        let doc: TableDocument = serde_json::from_str(text)?;
        let mut groups = Vec::with_capacity(Key::COUNT);
        for key in Key::all() {
            let group = doc
                .keypad
                .get(&key.to_string())
                .ok_or_else(|| Error::validation(format!("keypad has no key {key}")))?;
            let chars = group
                .iter()
                .map(|s| {
                    let mut it = s.chars();
                    match (it.next(), it.next()) {
                        (Some(c), None) => Ok(c),
                        _ => Err(Error::validation(format!("{s:?} is not a single symbol"))),
                    }
                })
                .collect::<Result<Vec<char>>>()?;
            groups.push(chars);
        }
        let alphabet = Alphabet::new(doc.alphabet.clone(), groups.concat())?;
        let layout = KeypadLayout::new(doc.alphabet.clone(), alphabet, groups)?;
        let n = doc.n as usize;
        let mut rows = Vec::with_capacity(doc.rows.len());
        for (expected, (ctx_text, codes)) in doc.rows.iter().enumerate() {
            let ctx = Context::parse(ctx_text)?;
            if ctx.len() != n {
                return Err(Error::validation(format!("row {ctx_text:?} is not {n} symbols")));
            }
            if ctx.index(layout.alphabet())? != expected {
                return Err(Error::validation(format!(
                    "row {ctx_text:?} is out of mixed-radix order"
                )));
            }
            if codes.len() != Key::COUNT {
                return Err(Error::validation(format!(
                    "row {ctx_text:?} has {} codes",
                    codes.len()
                )));
            }
            let mut raw = [0u8; Key::COUNT];
            for (slot, (key, &code)) in raw.iter_mut().zip(Key::all().zip(codes)) {
                let code = PermutationCode::new(code, layout.group_size(key) as u8)?;
                *slot = (code.value() - 1) as u8;
            }
            rows.push(raw);
        }
        let table = Self::from_rows(layout.alphabet(), n, rows)?;
        Ok((table, layout))
    }
}

/// JSON table document consumed by the keypad emulator.
#[derive(Debug, Serialize, Deserialize)]
struct TableDocument {
    alphabet: String,
    n: u8,
    keypad: IndexMap<String, Vec<String>>,
    rows: IndexMap<String, Vec<u16>>,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos + len;
        if end > self.bytes.len() {
            return Err(Error::format(self.bytes.len(), "unexpected end of input"));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
}
