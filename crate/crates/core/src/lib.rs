//! Higher-order label spreading over k-clique motifs.
//!
//! The pipeline: load an undirected weighted graph and a partial labeling
//! ([`graph`]), enumerate k-clique occurrences ([`motif`]), accumulate them
//! into per-motif participation matrices and a combined normalized
//! propagation operator ([`participation`]), spread labels to a fixed point
//! ([`solver`]), measure how strongly labels agree inside motifs against a
//! shuffled null ([`homogeneity`]), and run seeded benchmark experiments
//! ([`eval`]).

pub mod error;
pub mod eval;
pub mod graph;
pub mod homogeneity;
pub mod motif;
pub mod participation;
pub mod solver;

pub use error::{HolsError, Result};
