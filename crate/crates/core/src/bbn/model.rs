//! Fitted conditional tables for the position variable and ranking queries.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::bbn::learn::{learn_structure, StructureSearch};
use crate::bbn::score::{default_xi, Xi};
use crate::bbn::{letter_variables, NetworkStructure, VariableSpec};
use crate::context::Context;
use crate::corpus::{CountStore, Sample};
use crate::error::{Error, Result};
use crate::keypad::{Alphabet, Key, KeypadLayout};

pub const MODEL_FORMAT: &str = "reducedkey-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CptEntry {
    pub counts: Vec<u64>,
    pub probs: Vec<f64>,
}

/// Conditional table of one variable given a parent set.
///
/// Entries hold the Dirichlet posterior mean
/// `(N_ijk + Ξ/(r q)) / (N_ij + Ξ/q)`. Only observed parent configurations are
/// stored; all others have the uniform prior.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    parents: Vec<usize>,
    parent_cards: Vec<usize>,
    states: usize,
    entries: BTreeMap<u64, CptEntry>,
}

/// Fits the table of variable `variable` from its family counts.
pub fn fit_cpt(counts: &CountStore, variable: usize, xi: Xi) -> Cpt {
    let states = counts.cardinality(variable);
    let parents = counts.parents(variable).to_vec();
    let parent_cards = parents.iter().map(|&p| counts.cardinality(p)).collect();
    let row_prior = xi.value() / counts.config_count(variable);
    let cell_prior = row_prior / states as f64;
    let entries = counts
        .family(variable)
        .map(|(j, cells)| {
            let n_ij: u64 = cells.iter().sum();
            let denom = n_ij as f64 + row_prior;
            let probs = cells.iter().map(|&c| (c as f64 + cell_prior) / denom).collect();
            (
                j,
                CptEntry {
                    counts: cells.to_vec(),
                    probs,
                },
            )
        })
        .collect();
    Cpt {
        parents,
        parent_cards,
        states,
        entries,
    }
}

impl Cpt {
    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, &CptEntry)> {
        self.entries.iter().map(|(&j, e)| (j, e))
    }

    /// Configuration index from the values of *all* variables (only parents are read).
    pub fn config(&self, values: &[usize]) -> u64 {
        self.parents
            .iter()
            .zip(&self.parent_cards)
            .fold(0u64, |acc, (&p, &card)| acc * card as u64 + values[p] as u64)
    }

    /// The fitted entry for a configuration, if it was seen in training.
    pub fn observed(&self, j: u64) -> Option<&CptEntry> {
        self.entries.get(&j)
    }

    pub fn probabilities(&self, j: u64) -> Vec<f64> {
        match self.entries.get(&j) {
            Some(e) => e.probs.clone(),
            None => vec![1.0 / self.states as f64; self.states],
        }
    }
}

/// Which table answered a ranking query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankSource {
    /// `0` is the learned parent set; higher levels have dropped older letters.
    Level(usize),
    /// No level had seen the configuration; static key order.
    Static,
}

impl RankSource {
    pub fn is_fallback(self) -> bool {
        self != RankSource::Level(0)
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Prior strength; half the mean cardinality when absent.
    pub xi: Option<f64>,
    /// Fixed parent set for `State` (indices into the network variables);
    /// searched when absent.
    pub parents: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    layout: KeypadLayout,
    n: usize,
    variables: Vec<VariableSpec>,
    xi: Xi,
    levels: Vec<Cpt>,
    sample_count: u64,
}

/// The learned parent set followed by the sets left after dropping the
/// oldest letter, then the next oldest, and so on down to no letters.
fn fallback_chain(parents: &[usize], n: usize) -> Vec<Vec<usize>> {
    let mut chain = vec![parents.to_vec()];
    let mut current = parents.to_vec();
    for letter in 0..n {
        if current.contains(&letter) {
            current.retain(|&p| p != letter);
            chain.push(current.clone());
        }
    }
    chain
}

pub fn samples_to_rows(samples: &[Sample], alphabet: &Alphabet) -> Result<Vec<Vec<usize>>> {
    samples.iter().map(|s| s.values(alphabet)).collect()
}

impl Model {
    /// Learns the parent set of `State` (unless fixed in `options`) and fits
    /// the tables for it and its fallbacks.
    pub fn train(
        samples: &[Sample],
        layout: &KeypadLayout,
        n: usize,
        options: &TrainOptions,
    ) -> Result<(Model, Option<StructureSearch>)> {
        if samples.is_empty() {
            return Err(Error::validation("no training samples"));
        }
        if let Some(bad) = samples.iter().find(|s| s.context.len() != n) {
            return Err(Error::validation(format!(
                "sample context {} does not have length {n}",
                bad.context
            )));
        }
        let variables = letter_variables(layout, n);
        let xi = match options.xi {
            Some(v) => Xi::new(v)?,
            None => default_xi(&variables)?,
        };
        let rows = samples_to_rows(samples, layout.alphabet())?;
        let (parents, search) = match &options.parents {
            Some(p) => (p.clone(), None),
            None => {
                let search = learn_structure(&variables, &rows, xi)?;
                (search.best().parents.clone(), Some(search))
            }
        };
        let model = Self::fit_rows(layout, n, variables, xi, &parents, &rows)?;
        Ok((model, search))
    }

    fn fit_rows(
        layout: &KeypadLayout,
        n: usize,
        variables: Vec<VariableSpec>,
        xi: Xi,
        parents: &[usize],
        rows: &[Vec<usize>],
    ) -> Result<Model> {
        let state = variables.len() - 1;
        if parents.iter().any(|&p| p >= state) {
            return Err(Error::validation(format!(
                "parent set {parents:?} must draw from the {state} evidence variables"
            )));
        }
        let mut levels = Vec::new();
        for set in fallback_chain(parents, n) {
            let structure = NetworkStructure::state_family(variables.len(), &set)?;
            let mut counts = CountStore::new(&variables, &structure)?;
            for row in rows {
                counts.add(row)?;
            }
            levels.push(fit_cpt(&counts, state, xi));
        }
        Ok(Model {
            layout: layout.clone(),
            n,
            variables,
            xi,
            levels,
            sample_count: rows.len() as u64,
        })
    }

    pub fn layout(&self) -> &KeypadLayout {
        &self.layout
    }

    pub fn context_len(&self) -> usize {
        self.n
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn xi(&self) -> Xi {
        self.xi
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    /// Learned parent set of `State`.
    pub fn parents(&self) -> &[usize] {
        self.levels[0].parents()
    }

    pub fn parent_names(&self) -> Vec<&str> {
        self.parents()
            .iter()
            .map(|&p| self.variables[p].name.as_str())
            .collect()
    }

    /// The learned table and its fallbacks, most specific first.
    pub fn levels(&self) -> &[Cpt] {
        &self.levels
    }

    pub fn cpt(&self) -> &Cpt {
        &self.levels[0]
    }

    /// Positions `1..=k` of `key`'s letters, most probable first.
    pub fn rank_positions(&self, ctx: &Context, key: Key) -> Result<Vec<u8>> {
        self.rank_with_source(ctx, key).map(|(order, _)| order)
    }

    pub fn rank_with_source(&self, ctx: &Context, key: Key) -> Result<(Vec<u8>, RankSource)> {
        if ctx.len() != self.n {
            return Err(Error::validation(format!(
                "context {ctx} has length {}, model expects {}",
                ctx.len(),
                self.n
            )));
        }
        let mut values = ctx.digits(self.layout.alphabet())?;
        values.push(key.index());
        let k = self.layout.group_size(key);
        for (level, cpt) in self.levels.iter().enumerate() {
            if let Some(entry) = cpt.observed(cpt.config(&values)) {
                return Ok((order_by_probability(&entry.probs[..k]), RankSource::Level(level)));
            }
        }
        Ok(((1..=k as u8).collect(), RankSource::Static))
    }

    /// Fraction of samples whose true position is ranked first.
    pub fn holdout_accuracy(&self, samples: &[Sample]) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::validation("no samples to evaluate"));
        }
        let mut hits = 0usize;
        for s in samples {
            if self.rank_positions(&s.context, s.key)?[0] == s.state {
                hits += 1;
            }
        }
        Ok(hits as f64 / samples.len() as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument::from_model(self);
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        doc.into_model()
    }
}

/// Stable descending sort; equal probabilities keep static position order.
fn order_by_probability(probs: &[f64]) -> Vec<u8> {
    let mut order: Vec<u8> = (1..=probs.len() as u8).collect();
    order.sort_by(|&a, &b| {
        probs[b as usize - 1]
            .partial_cmp(&probs[a as usize - 1])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    layout: LayoutDocument,
    n: usize,
    xi: f64,
    variables: Vec<VariableDocument>,
    state_parents: Vec<String>,
    sample_count: u64,
    levels: Vec<LevelDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayoutDocument {
    name: String,
    alphabet: String,
    symbols: String,
    keypad: IndexMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct VariableDocument {
    name: String,
    cardinality: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct LevelDocument {
    parents: Vec<String>,
    entries: Vec<EntryDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EntryDocument {
    config: Vec<usize>,
    counts: Vec<u64>,
    probs: Vec<f64>,
}

fn unrank_config(mut j: u64, cards: &[usize]) -> Vec<usize> {
    let mut values = vec![0; cards.len()];
    for (slot, &c) in values.iter_mut().zip(cards).rev() {
        *slot = (j % c as u64) as usize;
        j /= c as u64;
    }
    values
}

impl ModelDocument {
    fn from_model(model: &Model) -> Self {
        let layout = &model.layout;
        let names = |ps: &[usize]| -> Vec<String> {
            ps.iter().map(|&p| model.variables[p].name.clone()).collect()
        };
        ModelDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            layout: LayoutDocument {
                name: layout.name().into(),
                alphabet: layout.alphabet().id().into(),
                symbols: layout.alphabet().symbols().iter().collect(),
                keypad: Key::all()
                    .map(|k| (k.to_string(), layout.group(k).iter().collect()))
                    .collect(),
            },
            n: model.n,
            xi: model.xi.value(),
            variables: model
                .variables
                .iter()
                .map(|v| VariableDocument {
                    name: v.name.clone(),
                    cardinality: v.cardinality,
                })
                .collect(),
            state_parents: names(model.parents()),
            sample_count: model.sample_count,
            levels: model
                .levels
                .iter()
                .map(|cpt| LevelDocument {
                    parents: names(cpt.parents()),
                    entries: cpt
                        .entries()
                        .map(|(j, e)| EntryDocument {
                            config: unrank_config(j, &cpt.parent_cards),
                            counts: e.counts.clone(),
                            probs: e.probs.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    fn into_model(self) -> Result<Model> {
        if self.format != MODEL_FORMAT {
            return Err(Error::validation(format!("not a model document: {:?}", self.format)));
        }
        if self.version != MODEL_VERSION {
            return Err(Error::validation(format!("unsupported model version {}", self.version)));
        }
        let alphabet = Alphabet::new(self.layout.alphabet, self.layout.symbols.chars().collect())?;
        let groups = Key::all()
            .map(|k| {
                self.layout
                    .keypad
                    .get(&k.to_string())
                    .map(|g| g.chars().collect())
                    .ok_or_else(|| Error::validation(format!("layout has no key {k}")))
            })
            .collect::<Result<Vec<Vec<char>>>>()?;
        let layout = KeypadLayout::new(self.layout.name, alphabet, groups)?;
        let variables = letter_variables(&layout, self.n);
        let declared: Vec<(String, usize)> = self.variables.into_iter().map(|v| (v.name, v.cardinality)).collect();
        let expected: Vec<(String, usize)> = variables.iter().map(|v| (v.name.clone(), v.cardinality)).collect();
        if declared != expected {
            return Err(Error::validation(format!(
                "variables {declared:?} do not match layout (expected {expected:?})"
            )));
        }
        let xi = Xi::new(self.xi)?;
        let index_of = |name: &str| {
            variables[..variables.len() - 1]
                .iter()
                .position(|v| v.name == name)
                .ok_or_else(|| Error::validation(format!("unknown parent variable {name:?}")))
        };
        let parents = self
            .state_parents
            .iter()
            .map(|s| index_of(s))
            .collect::<Result<Vec<usize>>>()?;
        let chain = fallback_chain(&parents, self.n);
        if chain.len() != self.levels.len() {
            return Err(Error::validation(format!(
                "expected {} table levels, found {}",
                chain.len(),
                self.levels.len()
            )));
        }
        let state = variables.len() - 1;
        let mut levels = Vec::with_capacity(chain.len());
        for (set, level) in chain.into_iter().zip(self.levels) {
            let listed = level
                .parents
                .iter()
                .map(|s| index_of(s))
                .collect::<Result<Vec<usize>>>()?;
            if listed != set {
                return Err(Error::validation("table levels do not follow the fallback chain"));
            }
            let structure = NetworkStructure::state_family(variables.len(), &set)?;
            let mut counts = CountStore::new(&variables, &structure)?;
            let mut row = vec![0usize; variables.len()];
            for entry in &level.entries {
                if entry.config.len() != set.len() || entry.counts.len() != variables[state].cardinality {
                    return Err(Error::validation("malformed table entry"));
                }
                for (&p, &v) in set.iter().zip(&entry.config) {
                    if v >= variables[p].cardinality {
                        return Err(Error::validation("table entry value out of range"));
                    }
                    row[p] = v;
                }
                for (k, &c) in entry.counts.iter().enumerate() {
                    row[state] = k;
                    for _ in 0..c {
                        counts.add(&row)?;
                    }
                }
            }
            levels.push(fit_cpt(&counts, state, xi));
        }
        Ok(Model {
            layout,
            n: self.n,
            variables,
            xi,
            levels,
            sample_count: self.sample_count,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{extract_samples, normalize};
    use crate::keypad::{builtin_layout, GREEK_CAPS};
    use approx::assert_relative_eq;

    fn greek() -> KeypadLayout {
        builtin_layout(GREEK_CAPS).unwrap()
    }

    fn samples_of(text: &str) -> Vec<Sample> {
        let layout = greek();
        extract_samples(&normalize(text, layout.alphabet()), &layout, 3).unwrap()
    }

    #[test]
    fn chain_drops_oldest_letters_first() {
        assert_eq!(
            fallback_chain(&[0, 1, 2, 3], 3),
            vec![vec![0, 1, 2, 3], vec![1, 2, 3], vec![2, 3], vec![3]]
        );
        assert_eq!(fallback_chain(&[2, 3], 3), vec![vec![2, 3], vec![3]]);
        assert_eq!(fallback_chain(&[3], 3), vec![vec![3]]);
        assert_eq!(fallback_chain(&[0, 2], 3), vec![vec![0, 2], vec![2], vec![]]);
    }

    #[test]
    fn cpt_posterior_mean() {
        let specs = vec![VariableSpec::new("p", 2).unwrap(), VariableSpec::new("s", 3).unwrap()];
        let structure = NetworkStructure::state_family(2, &[0]).unwrap();
        let mut counts = CountStore::new(&specs, &structure).unwrap();
        for (state, times) in [(0, 8), (1, 1), (2, 1)] {
            for _ in 0..times {
                counts.add(&[0, state]).unwrap();
            }
        }
        // Ξ/q = 1 with q = 2.
        let cpt = fit_cpt(&counts, 1, Xi::new(2.0).unwrap());
        let p = cpt.probabilities(0);
        assert_relative_eq!(p[0], (8.0 + 1.0 / 3.0) / 11.0, max_relative = 1e-12);
        assert_relative_eq!(p[1], (1.0 + 1.0 / 3.0) / 11.0, max_relative = 1e-12);
        assert_relative_eq!(p[0], 0.7576, epsilon = 1e-4);
        assert_relative_eq!(p[1], 0.1212, epsilon = 1e-4);
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        // unseen configuration: prior only
        assert_eq!(cpt.probabilities(1), vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn cpt_converges_to_frequencies() {
        let specs = vec![VariableSpec::new("s", 3).unwrap()];
        let structure = NetworkStructure::empty(1);
        let mut counts = CountStore::new(&specs, &structure).unwrap();
        for i in 0..100_000usize {
            let s = match i % 10 {
                0..=5 => 0,
                6..=8 => 1,
                _ => 2,
            };
            counts.add(&[s]).unwrap();
        }
        let p = fit_cpt(&counts, 0, Xi::new(1.5).unwrap()).probabilities(0);
        for (got, want) in p.iter().zip([0.6, 0.3, 0.1]) {
            assert_relative_eq!(*got, want, epsilon = 1e-3);
        }
    }

    #[test]
    fn letter_after_lik_is_iota() {
        let layout = greek();
        let samples = samples_of(&"ΗΛΙΚΙΑ ".repeat(100));
        let options = TrainOptions {
            parents: Some(vec![0, 1, 2, 3]),
            ..Default::default()
        };
        let (model, _) = Model::train(&samples, &layout, 3, &options).unwrap();
        let order = model
            .rank_positions(&Context::parse("ΛΙΚ").unwrap(), Key::new(4).unwrap())
            .unwrap();
        assert_eq!(layout.resolve(Key::new(4).unwrap(), order[0]), Some('Ι'));
    }

    #[test]
    fn fallback_levels_are_used() {
        let layout = greek();
        let samples = samples_of(&"ΗΛΙΚΙΑ ".repeat(20));
        let options = TrainOptions {
            parents: Some(vec![0, 1, 2, 3]),
            ..Default::default()
        };
        let (model, _) = Model::train(&samples, &layout, 3, &options).unwrap();
        let k4 = Key::new(4).unwrap();
        let (_, src) = model.rank_with_source(&Context::parse("ΛΙΚ").unwrap(), k4).unwrap();
        assert_eq!(src, RankSource::Level(0));
        // Only the last letter was seen before key 4.
        let (order, src) = model.rank_with_source(&Context::parse("ΩΩΚ").unwrap(), k4).unwrap();
        assert_eq!(src, RankSource::Level(2));
        assert_eq!(layout.resolve(k4, order[0]), Some('Ι'));
        let (_, src) = model.rank_with_source(&Context::parse("ΩΩΩ").unwrap(), k4).unwrap();
        assert_eq!(src, RankSource::Level(3));
        let (order, src) = model
            .rank_with_source(&Context::parse("ΩΩΩ").unwrap(), Key::new(9).unwrap())
            .unwrap();
        assert_eq!(src, RankSource::Static);
        assert_eq!(order, [1, 2, 3]);
    }

    #[test]
    fn ties_and_unseen_keys_keep_static_order() {
        let layout = greek();
        let samples = samples_of("Γ Β Α");
        let options = TrainOptions {
            parents: Some(vec![3]),
            ..Default::default()
        };
        let (model, _) = Model::train(&samples, &layout, 3, &options).unwrap();
        let ctx = Context::start(3);
        assert_eq!(model.rank_positions(&ctx, Key::new(2).unwrap()).unwrap(), [1, 2, 3]);
        let (order, src) = model.rank_with_source(&ctx, Key::new(3).unwrap()).unwrap();
        assert_eq!((order, src), (vec![1, 2, 3], RankSource::Static));
    }

    #[test]
    fn holdout_accuracy_edges() {
        let layout = greek();
        let samples = samples_of(&"ΑΑΑ ".repeat(10));
        let (model, _) = Model::train(&samples, &layout, 3, &TrainOptions::default()).unwrap();
        assert_eq!(model.holdout_accuracy(&samples).unwrap(), 1.0);
        assert!(model.holdout_accuracy(&[]).is_err());
    }

    #[test]
    fn document_round_trip() {
        let layout = greek();
        let samples = samples_of("ΜΠΟΡΕΙΣ ΝΑ ΠΕΡΑΣΕΙΣ ΑΠΟΨΕ ΑΠΟ ΤΟ ΣΠΙΤΙ ΚΑΤΑ ΤΙΣ ΔΕΚΑ");
        let (model, search) = Model::train(&samples, &layout, 3, &TrainOptions::default()).unwrap();
        assert_eq!(search.unwrap().candidates.len(), 16);
        let text = model.to_json().unwrap();
        let back = Model::from_json(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn document_rejects_tampering() {
        let layout = greek();
        let samples = samples_of("ΑΒΓ ΔΕΖ");
        let (model, _) = Model::train(&samples, &layout, 3, &TrainOptions::default()).unwrap();
        let text = model.to_json().unwrap();
        assert!(Model::from_json(&text.replace(MODEL_FORMAT, "other")).is_err());
        assert!(Model::from_json(&text.replace("\"cardinality\": 25", "\"cardinality\": 26")).is_err());
    }
}
