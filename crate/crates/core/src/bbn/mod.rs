//! Bayesian-network scoring, structure search and the position model.

mod learn;
mod model;
mod score;
mod structure;

pub use learn::{candidate_parent_sets, learn_structure, Candidate, StructureSearch};
pub use model::{
    fit_cpt, samples_to_rows, Cpt, CptEntry, Model, RankSource, TrainOptions, MODEL_FORMAT,
    MODEL_VERSION,
};
pub use score::{
    bayes_factor, default_xi, family_log_score, log_bayes_factor, log_marginal_likelihood, Xi,
};
pub use structure::{letter_variables, NetworkStructure, VariableSpec};
