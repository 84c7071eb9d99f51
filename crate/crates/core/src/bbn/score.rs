//! Bayesian-Dirichlet marginal likelihood of a structure, in log space.

use statrs::function::gamma::ln_gamma;

use crate::bbn::{NetworkStructure, VariableSpec};
use crate::corpus::CountStore;
use crate::error::{Error, Result};

/// Equivalent sample size of the symmetric Dirichlet prior.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Xi(f64);

impl Xi {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Xi(value))
        } else {
            Err(Error::validation(format!(
                "equivalent sample size must be positive, got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Half the average variable cardinality.
pub fn default_xi(specs: &[VariableSpec]) -> Result<Xi> {
    if specs.is_empty() {
        return Err(Error::validation("no variables to average"));
    }
    let mean = specs.iter().map(|s| s.cardinality as f64).sum::<f64>() / specs.len() as f64;
    Xi::new(mean / 2.0)
}

/// Log score of one family: the factor of `P(D|B)` contributed by variable `i`.
pub fn family_log_score(counts: &CountStore, i: usize, xi: Xi) -> f64 {
    let q = counts.config_count(i);
    let r = counts.cardinality(i) as f64;
    let alpha_j = xi.value() / q;
    let alpha_jk = alpha_j / r;
    let ln_alpha_j = ln_gamma(alpha_j);
    let ln_alpha_jk = ln_gamma(alpha_jk);
    counts
        .family(i)
        .map(|(_, cells)| {
            let n_ij: u64 = cells.iter().sum();
            let cells_term: f64 = cells
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| ln_gamma(alpha_jk + c as f64) - ln_alpha_jk)
                .sum();
            ln_alpha_j - ln_gamma(alpha_j + n_ij as f64) + cells_term
        })
        .sum()
}

/// Natural log of `P(D|B)`. Unobserved parent configurations contribute zero.
pub fn log_marginal_likelihood(structure: &NetworkStructure, counts: &CountStore, xi: Xi) -> Result<f64> {
    if structure.parent_sets() != counts.parent_sets() {
        return Err(Error::validation(
            "counts were not collected for this structure",
        ));
    }
    Ok((0..counts.variable_count())
        .map(|i| family_log_score(counts, i, xi))
        .sum())
}

/// `ln r` for `r = P(D|B1) / P(D|B2)` under equal structure priors.
pub fn log_bayes_factor(
    first: (&NetworkStructure, &CountStore),
    second: (&NetworkStructure, &CountStore),
    xi: Xi,
) -> Result<f64> {
    Ok(log_marginal_likelihood(first.0, first.1, xi)? - log_marginal_likelihood(second.0, second.1, xi)?)
}

pub fn bayes_factor(
    first: (&NetworkStructure, &CountStore),
    second: (&NetworkStructure, &CountStore),
    xi: Xi,
) -> Result<f64> {
    log_bayes_factor(first, second, xi).map(f64::exp)
}
