//! Exhaustive search over the parent set of the query variable.

use crate::bbn::score::{log_marginal_likelihood, Xi};
use crate::bbn::{NetworkStructure, VariableSpec};
use crate::corpus::CountStore;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub parents: Vec<usize>,
    pub log_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureSearch {
    /// Every candidate in evaluation order: by size, then lexicographically.
    pub candidates: Vec<Candidate>,
    /// Index into `candidates` of the winner.
    pub best: usize,
}

impl StructureSearch {
    pub fn best(&self) -> &Candidate {
        &self.candidates[self.best]
    }
}

/// All subsets of `0..m`, ordered by size and then lexicographically.
pub fn candidate_parent_sets(m: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = (0u32..1 << m)
        .map(|mask| (0..m).filter(|&b| mask & (1 << b) != 0).collect())
        .collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets
}

/// Scores every parent set of the last variable (the query) drawn from the
/// other variables and returns the one with the highest marginal likelihood.
///
/// Ties go to the earlier candidate, i.e. the smaller set.
pub fn learn_structure(specs: &[VariableSpec], rows: &[Vec<usize>], xi: Xi) -> Result<StructureSearch> {
    if rows.is_empty() {
        return Err(Error::validation("cannot learn a structure from no data"));
    }
    if specs.is_empty() {
        return Err(Error::validation("no variables"));
    }
    let evidence = specs.len() - 1;
    let mut candidates = Vec::with_capacity(1 << evidence);
    let mut best = 0;
    for parents in candidate_parent_sets(evidence) {
        let structure = NetworkStructure::state_family(specs.len(), &parents)?;
        let counts = CountStore::from_rows(specs, &structure, rows.iter().map(Vec::as_slice))?;
        let log_score = log_marginal_likelihood(&structure, &counts, xi)?;
        if log_score > candidates.get(best).map_or(f64::NEG_INFINITY, |c: &Candidate| c.log_score) {
            best = candidates.len();
        }
        candidates.push(Candidate { parents, log_score });
    }
    Ok(StructureSearch { candidates, best })
}
