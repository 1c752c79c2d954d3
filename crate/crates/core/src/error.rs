use thiserror::Error;

use crate::orbsurf::Diagnostic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("inexact division: {0}")]
    NotDivisible(String),
    #[error("substitution image {0} is not a single monomial")]
    NonMonomial(usize),
    #[error("index {index} out of range for rank {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid exchange matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid exchange polynomial coefficients: {0}")]
    InvalidTheta(String),
    #[error("invalid triangulation: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Triangulation(Vec<Diagnostic>),
    #[error("cannot flip {0}: not an arc")]
    FlipNotArc(String),
    #[error("algebra is not gentle: {0}")]
    NotGentle(String),
    #[error("path closure from vertex {0} does not terminate")]
    InfiniteDimensional(usize),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("relation violated: {0}")]
    Relation(String),
    #[error("invalid walk at step {pos}: {reason}")]
    InvalidWalk { pos: usize, reason: String },
    #[error("realization bound exceeded: no string of length <= {max_len} has g-vector {gvector:?}")]
    RealizationBound { gvector: Vec<i64>, max_len: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("unsupported module: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
