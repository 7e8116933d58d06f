use thiserror::Error;

use crate::lattice::LatticeVector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0} has a negative coordinate")]
    NegativeCoordinate(LatticeVector),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("polytope is not full-dimensional; no lattice point reaches coordinates {missing:?}")]
    NotFullDimensional { missing: Vec<usize> },

    #[error("inequality system does not describe a bounded polytope")]
    Unbounded,

    #[error("binomial is not balanced: {0}")]
    Unbalanced(String),

    #[error("replacement step leaves the polytope at {0}")]
    LeavesPolytope(LatticeVector),

    #[error("union of orthant pieces is not convex; {0} lies in the hull but not in the union")]
    NotConvex(LatticeVector),

    #[error("invalid locally anti-blocking pieces: {0}")]
    InvalidPieces(String),

    #[error("{sum} has no decomposition p + q inside the configuration")]
    NoDecomposition { sum: LatticeVector },

    #[error("weight of the ordered list is negative in coordinate {coordinate}")]
    NegativeWeight { coordinate: usize },

    #[error("chain step {step} is not a quadratic move")]
    NotQuadratic { step: usize },

    #[error("chain endpoints do not match: {0}")]
    EndpointMismatch(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("{0} is not a point of the configuration")]
    PointOutsideConfiguration(LatticeVector),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid coloring: {0}")]
    InvalidColoring(String),

    #[error("vertex {vertex} is not colored with either switched color")]
    NotSwitchable { vertex: usize },

    #[error("no proper {k}-coloring exists (chromatic number is {chi})")]
    NotColorable { k: usize, chi: usize },

    #[error("state space exceeds the budget of {limit} {what}")]
    BudgetExceeded { what: &'static str, limit: usize },

    #[error("instance exceeds desk-scale limits: {0}")]
    TooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}
