//! Text normalization, training-sample extraction and family counts.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::bbn::{NetworkStructure, VariableSpec};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::keypad::{Alphabet, Key, KeypadLayout, SPACE};

/// Alphabet letters separated by single spaces, without leading or trailing space.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolStream {
    symbols: Vec<char>,
}

impl SymbolStream {
    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn letters(&self) -> usize {
        self.symbols.iter().filter(|&&c| c != SPACE).count()
    }

    pub fn spaces(&self) -> usize {
        self.symbols.len() - self.letters()
    }

    pub fn words(&self) -> usize {
        if self.symbols.is_empty() {
            0
        } else {
            self.spaces() + 1
        }
    }
}

impl fmt::Display for SymbolStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.symbols.iter().try_for_each(|c| write!(f, "{c}"))
    }
}

/// Maps arbitrary text onto `alphabet`.
///
/// Text is canonically decomposed, combining marks are dropped and letters
/// are upper-cased, so accented and lowercase input lands on the capital
/// letters. Every maximal run of other characters becomes one space.
pub fn normalize(text: &str, alphabet: &Alphabet) -> SymbolStream {
    let mut symbols = Vec::new();
    let mut gap = false;
    for c in text.nfd() {
        if is_combining_mark(c) {
            continue;
        }
        for u in c.to_uppercase() {
            if alphabet.contains(u) {
                if gap && !symbols.is_empty() {
                    symbols.push(SPACE);
                }
                gap = false;
                symbols.push(u);
            } else {
                gap = true;
            }
        }
    }
    SymbolStream { symbols }
}

/// One training row: the `n` preceding symbols, the key pressed and the
/// 1-based position of the wanted letter on that key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sample {
    pub context: Context,
    pub key: Key,
    pub state: u8,
}

impl Sample {
    /// Variable values in network order: context digits oldest first, key index, state index.
    pub fn values(&self, alphabet: &Alphabet) -> Result<Vec<usize>> {
        let mut values = self.context.digits(alphabet)?;
        values.push(self.key.index());
        values.push(self.state as usize - 1);
        Ok(values)
    }
}

pub fn extract_samples(stream: &SymbolStream, layout: &KeypadLayout, n: usize) -> Result<Vec<Sample>> {
    if n == 0 {
        return Err(Error::validation("context length must be at least 1"));
    }
    let mut context = Context::start(n);
    let mut samples = Vec::with_capacity(stream.letters());
    for &symbol in stream.symbols() {
        if symbol != SPACE {
            let (key, state) = layout.locate(symbol).ok_or_else(|| {
                Error::Consistency(format!("symbol {symbol:?} is not on any key"))
            })?;
            samples.push(Sample {
                context: context.clone(),
                key,
                state,
            });
        }
        context.push(symbol);
    }
    Ok(samples)
}

/// Writes samples as CSV with columns `l{n}..l1,key,state`, space rendered `_`.
pub fn write_samples_csv<W: Write>(samples: &[Sample], n: usize, mut out: W) -> Result<()> {
    let header: Vec<String> = (1..=n)
        .rev()
        .map(|i| format!("l{i}"))
        .chain(["key".into(), "state".into()])
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for s in samples {
        let cells: Vec<String> = s
            .context
            .to_string()
            .chars()
            .map(String::from)
            .chain([s.key.to_string(), s.state.to_string()])
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Sufficient statistics `N_ijk` for every family of a network structure.
///
/// Parent configurations `j` are mixed-radix indices over the parent values in
/// the order the structure lists them. Only observed configurations are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountStore {
    cardinalities: Vec<usize>,
    parents: Vec<Vec<usize>>,
    families: Vec<BTreeMap<u64, Vec<u64>>>,
    total: u64,
}

impl CountStore {
    pub fn new(specs: &[VariableSpec], structure: &NetworkStructure) -> Result<Self> {
        if specs.len() != structure.len() {
            return Err(Error::validation(format!(
                "{} variables but structure covers {}",
                specs.len(),
                structure.len()
            )));
        }
        let cardinalities: Vec<usize> = specs.iter().map(|s| s.cardinality).collect();
        for i in 0..specs.len() {
            structure.parents(i).iter().try_fold(1u64, |acc, &p| {
                acc.checked_mul(cardinalities[p] as u64)
                    .ok_or_else(|| Error::validation("parent configuration space overflows u64"))
            })?;
        }
        Ok(CountStore {
            cardinalities,
            parents: structure.parent_sets().to_vec(),
            families: vec![BTreeMap::new(); specs.len()],
            total: 0,
        })
    }

    pub fn from_rows<'a, I>(specs: &[VariableSpec], structure: &NetworkStructure, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        let mut store = Self::new(specs, structure)?;
        for row in rows {
            store.add(row)?;
        }
        Ok(store)
    }

    pub fn from_samples(
        samples: &[Sample],
        layout: &KeypadLayout,
        specs: &[VariableSpec],
        structure: &NetworkStructure,
    ) -> Result<Self> {
        let mut store = Self::new(specs, structure)?;
        for s in samples {
            store.add(&s.values(layout.alphabet())?)?;
        }
        Ok(store)
    }

    pub fn add(&mut self, row: &[usize]) -> Result<()> {
        if row.len() != self.cardinalities.len() {
            return Err(Error::validation(format!(
                "row has {} values, expected {}",
                row.len(),
                self.cardinalities.len()
            )));
        }
        if let Some(i) = (0..row.len()).find(|&i| row[i] >= self.cardinalities[i]) {
            return Err(Error::validation(format!(
                "value {} of variable {i} exceeds cardinality {}",
                row[i], self.cardinalities[i]
            )));
        }
        for i in 0..row.len() {
            let j = self.config_index(i, row);
            let r = self.cardinalities[i];
            self.families[i].entry(j).or_insert_with(|| vec![0; r])[row[i]] += 1;
        }
        self.total += 1;
        Ok(())
    }

    /// Adds another store's counts; both must describe the same structure.
    pub fn merge(&mut self, other: &CountStore) -> Result<()> {
        if self.cardinalities != other.cardinalities || self.parents != other.parents {
            return Err(Error::validation("cannot merge counts of different structures"));
        }
        for (mine, theirs) in self.families.iter_mut().zip(&other.families) {
            for (&j, counts) in theirs {
                let slot = mine.entry(j).or_insert_with(|| vec![0; counts.len()]);
                slot.iter_mut().zip(counts).for_each(|(a, b)| *a += b);
            }
        }
        self.total += other.total;
        Ok(())
    }

    fn config_index(&self, i: usize, row: &[usize]) -> u64 {
        self.parents[i]
            .iter()
            .fold(0u64, |acc, &p| acc * self.cardinalities[p] as u64 + row[p] as u64)
    }

    /// Parent configuration index for variable `i` given its parents' values.
    pub fn config_of(&self, i: usize, parent_values: &[usize]) -> u64 {
        self.parents[i]
            .iter()
            .zip(parent_values)
            .fold(0u64, |acc, (&p, &v)| acc * self.cardinalities[p] as u64 + v as u64)
    }

    pub fn variable_count(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn cardinality(&self, i: usize) -> usize {
        self.cardinalities[i]
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn parent_sets(&self) -> &[Vec<usize>] {
        &self.parents
    }

    /// `q_i`: number of parent configurations, as a float since it only feeds the prior.
    pub fn config_count(&self, i: usize) -> f64 {
        self.parents[i]
            .iter()
            .map(|&p| self.cardinalities[p] as f64)
            .product()
    }

    /// Observed configurations of family `i` with their `N_ijk` vectors.
    pub fn family(&self, i: usize) -> impl Iterator<Item = (u64, &[u64])> {
        self.families[i].iter().map(|(&j, v)| (j, v.as_slice()))
    }

    pub fn counts(&self, i: usize, j: u64) -> Option<&[u64]> {
        self.families[i].get(&j).map(Vec::as_slice)
    }

    /// `N_ij`
    pub fn marginal(&self, i: usize, j: u64) -> u64 {
        self.counts(i, j).map_or(0, |v| v.iter().sum())
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbn::letter_variables;
    use crate::keypad::{builtin_layout, GREEK_CAPS};
    use proptest::prelude::*;

    fn greek() -> KeypadLayout {
        builtin_layout(GREEK_CAPS).unwrap()
    }

    fn norm(text: &str) -> String {
        normalize(text, greek().alphabet()).to_string()
    }

    #[test]
    fn collapse_rule() {
        assert_eq!(normalize("Α.Π", greek().alphabet()).symbols(), &['Α', ' ', 'Π']);
        assert!(normalize("", greek().alphabet()).is_empty());
        assert_eq!(norm("ΗΜΕΡΑ  ΚΑΛΗ!"), "ΗΜΕΡΑ ΚΑΛΗ");
        assert_eq!(norm("  ;;12 ΑΒ...Γ\n"), "ΑΒ Γ");
        assert_eq!(norm("!!!"), "");
    }

    #[test]
    fn folds_case_and_accents() {
        assert_eq!(norm("καλημέρα σας"), "ΚΑΛΗΜΕΡΑ ΣΑΣ");
        assert_eq!(norm("Ώρα, ΐ"), "ΩΡΑ Ι");
        // Latin letters are foreign to the Greek alphabet.
        assert_eq!(norm("ΑBΓ"), "Α Γ");
    }

    #[test]
    fn samples_for_single_letter() {
        let layout = greek();
        let stream = normalize("Α", layout.alphabet());
        let samples = extract_samples(&stream, &layout, 3).unwrap();
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].context, Context::start(3));
        assert_eq!(samples[0].key, Key::new(2).unwrap());
        assert_eq!(samples[0].state, 1);
    }

    #[test]
    fn sample_windows() {
        let layout = greek();
        let stream = normalize("ΗΜΕΡΑ ΚΑΛΗ", layout.alphabet());
        let samples = extract_samples(&stream, &layout, 3).unwrap();
        assert_eq!(samples.len(), 9);
        assert_eq!(samples[4].context.to_string(), "ΜΕΡ");
        assert_eq!((samples[4].key.digit(), samples[4].state), (2, 1));
        assert_eq!(samples[5].context.to_string(), "ΡΑ_");
        assert_eq!(samples[0].context.to_string(), "___");
        assert_eq!(samples[1].context.to_string(), "__Η");
    }

    #[test]
    fn samples_csv() {
        let layout = greek();
        let stream = normalize("ΑΒ", layout.alphabet());
        let samples = extract_samples(&stream, &layout, 3).unwrap();
        let mut out = Vec::new();
        write_samples_csv(&samples, 3, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "l3,l2,l1,key,state\n_,_,_,2,1\n_,_,Α,2,2\n"
        );
    }

    fn counts_of(samples: &[Sample]) -> CountStore {
        let layout = greek();
        let specs = letter_variables(&layout, 3);
        let structure = NetworkStructure::state_family(5, &[2, 3]).unwrap();
        CountStore::from_samples(samples, &layout, &specs, &structure).unwrap()
    }

    #[test]
    fn count_edge_cases() {
        let empty = counts_of(&[]);
        assert_eq!(empty.total(), 0);
        assert!((0..5).all(|i| empty.family(i).count() == 0));

        let layout = greek();
        let one = extract_samples(&normalize("Α", layout.alphabet()), &layout, 3).unwrap();
        let store = counts_of(&one);
        for i in 0..5 {
            let cells: Vec<u64> = store.family(i).flat_map(|(_, v)| v.to_vec()).collect();
            assert_eq!(cells.iter().sum::<u64>(), 1);
            assert_eq!(cells.iter().filter(|&&c| c == 1).count(), 1);
        }
    }

    #[test]
    fn rejects_values_beyond_cardinality() {
        let specs = vec![VariableSpec::new("A", 2).unwrap()];
        let structure = NetworkStructure::empty(1);
        assert!(CountStore::from_rows(&specs, &structure, [&[2usize][..]]).is_err());
    }

    fn greek_text() -> impl Strategy<Value = String> {
        proptest::collection::vec(
            prop_oneof![
                4 => proptest::char::range('Α', 'Ω'),
                1 => Just(' '),
                1 => Just('.'),
                1 => proptest::char::range('a', 'z'),
            ],
            0..60,
        )
        .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(text in greek_text()) {
            let once = norm(&text);
            prop_assert_eq!(norm(&once), once.clone());
            prop_assert!(!once.starts_with(' ') && !once.ends_with(' '));
            prop_assert!(!once.contains("  "));
        }

        #[test]
        fn samples_resolve_to_their_letters(text in greek_text()) {
            let layout = greek();
            let stream = normalize(&text, layout.alphabet());
            let samples = extract_samples(&stream, &layout, 3).unwrap();
            prop_assert_eq!(samples.len(), stream.letters());
            let letters: Vec<char> = stream.symbols().iter().copied().filter(|&c| c != ' ').collect();
            for (s, &c) in samples.iter().zip(&letters) {
                prop_assert_eq!(layout.resolve(s.key, s.state), Some(c));
            }
        }

        #[test]
        fn counts_are_linear(a in greek_text(), b in greek_text()) {
            let layout = greek();
            let sa = extract_samples(&normalize(&a, layout.alphabet()), &layout, 3).unwrap();
            let sb = extract_samples(&normalize(&b, layout.alphabet()), &layout, 3).unwrap();
            let joined: Vec<Sample> = sa.iter().chain(&sb).cloned().collect();
            let mut merged = counts_of(&sa);
            merged.merge(&counts_of(&sb)).unwrap();
            prop_assert_eq!(&merged, &counts_of(&joined));

            let doubled: Vec<Sample> = sa.iter().chain(&sa).cloned().collect();
            let twice = counts_of(&doubled);
            let once = counts_of(&sa);
            for i in 0..5 {
                for (j, v) in once.family(i) {
                    let d: Vec<u64> = v.iter().map(|x| 2 * x).collect();
                    prop_assert_eq!(twice.counts(i, j).unwrap(), d.as_slice());
                }
                for (j, v) in twice.family(i) {
                    prop_assert_eq!(once.marginal(i, j) * 2, v.iter().sum::<u64>());
                }
            }
        }
    }
}
