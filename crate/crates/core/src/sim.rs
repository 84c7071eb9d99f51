//! Deterministic keystroke replay for multi-tap, two-key and predictive entry.
//!
//! Every method enters a space with one press of key `0`. Predictive entry
//! presses the letter's key once and then `#` until the wanted letter shows;
//! the context advances by the letter actually entered.

use std::fmt::Write as _;

use serde::Serialize;

use crate::context::Context;
use crate::corpus::{normalize, SymbolStream};
use crate::error::{Error, Result};
use crate::keypad::{Key, KeypadLayout, SPACE};
use crate::table::ReorderingTable;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ReplayOutcome {
    pub letters: u64,
    pub spaces: u64,
    /// All presses, spaces included.
    pub keystrokes: u64,
    /// Letters that needed exactly one `#`.
    pub singles: u64,
    /// Letters that needed two or more `#`.
    pub doubles: u64,
    /// `#` presses beyond the second for one letter (four-letter keys only).
    pub deep_cycles: u64,
    /// Multi-tap waits between consecutive letters on the same key.
    pub timeouts: u64,
}

impl ReplayOutcome {
    pub fn letter_keystrokes(&self) -> u64 {
        self.keystrokes - self.spaces
    }

    pub fn characters(&self) -> u64 {
        self.letters + self.spaces
    }

    /// Keystrokes per character, spaces counted as characters.
    pub fn kspc(&self) -> f64 {
        ratio(self.keystrokes, self.characters())
    }

    /// Keystrokes per letter, spaces left out of both sides.
    pub fn kspc_letters(&self) -> f64 {
        ratio(self.letter_keystrokes(), self.letters)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn locate(layout: &KeypadLayout, symbol: char) -> Result<(Key, u8)> {
    layout
        .locate(symbol)
        .ok_or_else(|| Error::Consistency(format!("symbol {symbol:?} is not on any key")))
}

/// Multi-tap: a letter costs its static position within its key.
pub fn stem_count(stream: &SymbolStream, layout: &KeypadLayout) -> Result<ReplayOutcome> {
    let mut out = ReplayOutcome::default();
    let mut previous: Option<Key> = None;
    for &symbol in stream.symbols() {
        if symbol == SPACE {
            out.spaces += 1;
            out.keystrokes += 1;
            previous = None;
            continue;
        }
        let (key, position) = locate(layout, symbol)?;
        if previous == Some(key) {
            out.timeouts += 1;
        }
        out.letters += 1;
        out.keystrokes += position as u64;
        previous = Some(key);
    }
    Ok(out)
}

/// Group key then position key: two presses per letter.
pub fn twokey_count(stream: &SymbolStream, layout: &KeypadLayout) -> Result<ReplayOutcome> {
    let mut out = ReplayOutcome::default();
    for &symbol in stream.symbols() {
        if symbol == SPACE {
            out.spaces += 1;
            out.keystrokes += 1;
        } else {
            locate(layout, symbol)?;
            out.letters += 1;
            out.keystrokes += 2;
        }
    }
    Ok(out)
}

pub fn ipreti_replay(stream: &SymbolStream, table: &ReorderingTable, layout: &KeypadLayout) -> Result<ReplayOutcome> {
    let mut out = ReplayOutcome::default();
    let mut context = Context::start(table.context_len());
    for &symbol in stream.symbols() {
        if symbol == SPACE {
            out.spaces += 1;
            out.keystrokes += 1;
        } else {
            let (key, _) = locate(layout, symbol)?;
            let offered = table.lookup(layout, &context, key)?;
            let cycles = offered
                .iter()
                .position(|&c| c == symbol)
                .ok_or_else(|| Error::Consistency(format!("{symbol:?} missing from key {key}")))?
                as u64;
            out.letters += 1;
            out.keystrokes += 1 + cycles;
            match cycles {
                0 => {}
                1 => out.singles += 1,
                c => {
                    out.doubles += 1;
                    out.deep_cycles += c - 2;
                }
            }
        }
        context.push(symbol);
    }
    Ok(out)
}

/// Share of letters shown correctly on the first press.
pub fn first_guess_accuracy(stream: &SymbolStream, table: &ReorderingTable, layout: &KeypadLayout) -> Result<f64> {
    let out = ipreti_replay(stream, table, layout)?;
    if out.letters == 0 {
        return Err(Error::validation("no letters to predict"));
    }
    Ok(1.0 - (out.singles + out.doubles) as f64 / out.letters as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhraseReport {
    /// 1-based phrase number; `None` on the totals row.
    pub phrase: Option<usize>,
    pub words: u64,
    /// Letters plus spaces.
    pub characters: u64,
    pub letters: u64,
    pub ipreti_keystrokes: u64,
    pub stem_keystrokes: u64,
    pub twokey_keystrokes: u64,
    /// `(stem - ipreti) / stem`
    pub improvement_pct: f64,
    pub singles: u64,
    pub doubles: u64,
    /// Singles per character.
    pub single_rate: f64,
    /// Doubles per character.
    pub double_rate: f64,
    pub kspc_ipreti: f64,
    pub kspc_stem: f64,
    pub kspc_ipreti_letters: f64,
    pub kspc_stem_letters: f64,
    pub timeouts: u64,
}

impl PhraseReport {
    fn new(
        phrase: Option<usize>,
        words: u64,
        ipreti: &ReplayOutcome,
        stem: &ReplayOutcome,
        twokey: &ReplayOutcome,
    ) -> Self {
        let characters = ipreti.characters();
        let improvement = if stem.keystrokes == 0 {
            0.0
        } else {
            (stem.keystrokes as f64 - ipreti.keystrokes as f64) / stem.keystrokes as f64
        };
        PhraseReport {
            phrase,
            words,
            characters,
            letters: ipreti.letters,
            ipreti_keystrokes: ipreti.keystrokes,
            stem_keystrokes: stem.keystrokes,
            twokey_keystrokes: twokey.keystrokes,
            improvement_pct: improvement,
            singles: ipreti.singles,
            doubles: ipreti.doubles,
            single_rate: ratio(ipreti.singles, characters),
            double_rate: ratio(ipreti.doubles, characters),
            kspc_ipreti: ipreti.kspc(),
            kspc_stem: stem.kspc(),
            kspc_ipreti_letters: ipreti.kspc_letters(),
            kspc_stem_letters: stem.kspc_letters(),
            timeouts: stem.timeouts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub phrases: Vec<PhraseReport>,
    pub total: PhraseReport,
}

/// Replays each phrase under all three methods.
pub fn evaluate<S: AsRef<str>>(phrases: &[S], table: &ReorderingTable, layout: &KeypadLayout) -> Result<EvaluationReport> {
    if phrases.is_empty() {
        return Err(Error::validation("no phrases to evaluate"));
    }
    let mut rows = Vec::with_capacity(phrases.len());
    let mut sum = [ReplayOutcome::default(); 3];
    let mut words = 0;
    for (i, text) in phrases.iter().enumerate() {
        let stream = normalize(text.as_ref(), layout.alphabet());
        let outcomes = [
            ipreti_replay(&stream, table, layout)?,
            stem_count(&stream, layout)?,
            twokey_count(&stream, layout)?,
        ];
        for (acc, o) in sum.iter_mut().zip(&outcomes) {
            acc.letters += o.letters;
            acc.spaces += o.spaces;
            acc.keystrokes += o.keystrokes;
            acc.singles += o.singles;
            acc.doubles += o.doubles;
            acc.deep_cycles += o.deep_cycles;
            acc.timeouts += o.timeouts;
        }
        words += stream.words() as u64;
        rows.push(PhraseReport::new(
            Some(i + 1),
            stream.words() as u64,
            &outcomes[0],
            &outcomes[1],
            &outcomes[2],
        ));
    }
    let total = PhraseReport::new(None, words, &sum[0], &sum[1], &sum[2]);
    Ok(EvaluationReport { phrases: rows, total })
}

/// One phrase per non-blank line.
pub fn read_phrases(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect()
}

fn pct(x: f64) -> String {
    format!("{:.1}%", x * 100.0)
}

impl EvaluationReport {
    /// Aligned table with one row per phrase and a totals row.
    pub fn to_text(&self) -> String {
        let header = [
            "Phrase",
            "# words",
            "Characters",
            "iPRETI",
            "STEM",
            "% improvement",
            "Single errors",
            "Double errors",
        ];
        let mut lines: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for r in self.phrases.iter().chain([&self.total]) {
            lines.push(vec![
                r.phrase.map_or("Total".into(), |p| p.to_string()),
                r.words.to_string(),
                r.characters.to_string(),
                r.ipreti_keystrokes.to_string(),
                r.stem_keystrokes.to_string(),
                pct(r.improvement_pct),
                pct(r.single_rate),
                pct(r.double_rate),
            ]);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| lines.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in &lines {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (cell, &w))| {
                    if c == 0 {
                        format!("{cell:<w$}")
                    } else {
                        format!("{cell:>w$}")
                    }
                })
                .collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
        }
        let t = &self.total;
        writeln!(
            out,
            "\nKSPC with spaces: iPRETI {:.3}, STEM {:.3}; letters only: iPRETI {:.3}, STEM {:.3}",
            t.kspc_ipreti, t.kspc_stem, t.kspc_ipreti_letters, t.kspc_stem_letters
        )
        .unwrap();
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "phrase,words,characters,letters,ipreti,stem,twokey,improvement,singles,doubles,single_rate,double_rate,kspc_ipreti,kspc_stem,kspc_ipreti_letters,kspc_stem_letters,timeouts\n",
        );
        for r in self.phrases.iter().chain([&self.total]) {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{:.6},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                r.phrase.map_or("total".into(), |p| p.to_string()),
                r.words,
                r.characters,
                r.letters,
                r.ipreti_keystrokes,
                r.stem_keystrokes,
                r.twokey_keystrokes,
                r.improvement_pct,
                r.singles,
                r.doubles,
                r.single_rate,
                r.double_rate,
                r.kspc_ipreti,
                r.kspc_stem,
                r.kspc_ipreti_letters,
                r.kspc_stem_letters,
                r.timeouts
            )
            .unwrap();
        }
        out
    }
}
