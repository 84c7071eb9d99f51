#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reducedkey::corpus::Sample;
use reducedkey::Alphabet;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn docs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs")
}

/// `P(D|B)` by the chain rule of the Dirichlet-multinomial: each row's
/// predictive probability `(N_ijk + a/(r q)) / (N_ij + a/q)` using only the
/// counts of the rows before it. No gamma functions involved.
pub fn sequential_marginal_likelihood(
    cards: &[usize],
    parents: &[Vec<usize>],
    rows: &[Vec<usize>],
    xi: f64,
) -> f64 {
    let mut seen: Vec<HashMap<(Vec<usize>, usize), u64>> = vec![HashMap::new(); cards.len()];
    let mut seen_parent: Vec<HashMap<Vec<usize>, u64>> = vec![HashMap::new(); cards.len()];
    let mut p = 1.0;
    for row in rows {
        for i in 0..cards.len() {
            let q: f64 = parents[i].iter().map(|&p| cards[p] as f64).product();
            let r = cards[i] as f64;
            let config: Vec<usize> = parents[i].iter().map(|&p| row[p]).collect();
            let n_ijk = *seen[i].get(&(config.clone(), row[i])).unwrap_or(&0) as f64;
            let n_ij = *seen_parent[i].get(&config).unwrap_or(&0) as f64;
            p *= (n_ijk + xi / (r * q)) / (n_ij + xi / q);
            *seen[i].entry((config.clone(), row[i])).or_insert(0) += 1;
            *seen_parent[i].entry(config).or_insert(0) += 1;
        }
    }
    p
}

/// A random DAG over `m` variables: parents only from lower indices.
pub fn random_parents(rng: &mut impl Rng, m: usize) -> Vec<Vec<usize>> {
    (0..m)
        .map(|i| (0..i).filter(|_| rng.gen_bool(0.5)).collect())
        .collect()
}

pub fn random_rows(rng: &mut impl Rng, cards: &[usize], count: usize) -> Vec<Vec<usize>> {
    (0..count)
        .map(|_| cards.iter().map(|&c| rng.gen_range(0..c)).collect())
        .collect()
}

/// Text drawn from a fixed first-order chain over the letters and the space.
/// Transition weights are cubed uniforms, so each symbol has a few likely
/// successors; the space never follows itself.
pub fn markov_corpus(alphabet: &Alphabet, seed: u64, min_bytes: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radix = alphabet.radix();
    let weights: Vec<Vec<f64>> = (0..radix)
        .map(|from| {
            (0..radix)
                .map(|to| {
                    if from == 0 && to == 0 {
                        0.0
                    } else {
                        let u: f64 = rng.gen();
                        let w = u * u * u;
                        if to == 0 { w + 0.15 } else { w }
                    }
                })
                .collect()
        })
        .collect();
    let mut text = String::new();
    let mut state = 1 + rng.gen_range(0..alphabet.len());
    while text.len() < min_bytes {
        text.push(alphabet.symbol(state).unwrap());
        let total: f64 = weights[state].iter().sum();
        let mut pick = rng.gen::<f64>() * total;
        let mut next = radix - 1;
        for (to, &w) in weights[state].iter().enumerate() {
            if pick < w {
                next = to;
                break;
            }
            pick -= w;
        }
        state = next;
    }
    text.trim_end().to_string()
}

/// Hits of the best possible fixed choice per (context, key): the per-group
/// mode, counted directly on the samples.
pub fn empirical_mode_accuracy(samples: &[Sample]) -> f64 {
    let mut groups: HashMap<(String, u8), HashMap<u8, u64>> = HashMap::new();
    for s in samples {
        *groups
            .entry((s.context.to_string(), s.key.digit()))
            .or_default()
            .entry(s.state)
            .or_default() += 1;
    }
    let hits: u64 = groups.values().map(|m| *m.values().max().unwrap()).sum();
    hits as f64 / samples.len() as f64
}

pub fn static_accuracy(samples: &[Sample]) -> f64 {
    samples.iter().filter(|s| s.state == 1).count() as f64 / samples.len() as f64
}

/// Named checks for one acceptance criterion, printed as a block.
pub struct Criterion {
    name: &'static str,
    results: Vec<(String, bool)>,
}

impl Criterion {
    pub fn new(name: &'static str) -> Self {
        Criterion {
            name,
            results: Vec::new(),
        }
    }

    pub fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.results.push((what.into(), ok));
    }

    pub fn finish(self) -> bool {
        let failed: Vec<&str> = self
            .results
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(w, _)| w.as_str())
            .collect();
        for (what, ok) in &self.results {
            println!("    {} {what}", if *ok { "ok  " } else { "FAIL" });
        }
        println!(
            "[{}] {}",
            if failed.is_empty() { "PASS" } else { "FAIL" },
            self.name
        );
        failed.is_empty()
    }
}
