//! Context-driven letter reordering for phone-style keypads.
//!
//! The pipeline: [`corpus::normalize`] text onto a keypad alphabet, extract
//! [`corpus::Sample`]s, train a [`bbn::Model`] that ranks a key's letters given
//! the preceding symbols, bake it into a [`table::ReorderingTable`] with
//! [`compile::compile_table`], then replay text against it with [`sim`].
//! [`klm`] holds the analytic timing model.

pub mod bbn;
pub mod compile;
pub mod context;
pub mod corpus;
pub mod error;
pub mod keypad;
pub mod klm;
pub mod perm;
pub mod sim;
pub mod table;

pub use context::Context;
pub use error::{Error, Result};
pub use keypad::{builtin_layout, Alphabet, Key, KeypadLayout};
pub use perm::{decode_permutation, encode_permutation, PermutationCode};
pub use table::ReorderingTable;
