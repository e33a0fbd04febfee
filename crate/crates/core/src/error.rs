//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HolsError>;

#[derive(Debug, Error)]
pub enum HolsError {
    /// A line of an input file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An input violated a documented contract (negative weight, bad motif
    /// plan, invalid solver parameter, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// A label file referenced a vertex that is not part of the graph.
    #[error("unknown vertex id {id}: vertex does not appear in the edge list")]
    UnknownVertex { id: u64 },

    /// A vertex was assigned two different classes.
    #[error("conflicting labels for vertex id {id}: {first} vs {second}")]
    LabelCollision { id: u64, first: usize, second: usize },

    /// Vertex index outside `0..N`.
    #[error("vertex {vertex} out of range for graph with {num_vertices} vertices")]
    OutOfRange { vertex: usize, num_vertices: usize },

    /// Matrix shapes do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A non-finite value appeared during iteration.
    #[error("non-finite value encountered at iteration {iteration}")]
    NonFinite { iteration: usize },

    /// The dense path refused an input that is too large for it.
    #[error("refusing dense computation: {num_vertices} vertices exceeds cap {cap}")]
    TooLargeForDense { num_vertices: usize, cap: usize },

    /// An evaluation was requested over an empty vertex set.
    #[error("evaluation set is empty")]
    EmptyEvaluationSet,

    /// A cache file does not match the requesting graph and plan.
    #[error("cache mismatch: {0}")]
    CacheMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
