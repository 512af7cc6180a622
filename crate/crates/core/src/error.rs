use thiserror::Error;

use crate::certificate::PolytopeViolation;
use crate::decomposition::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("assignment has {got} labels but the model has {expected} vertices")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label {label} at vertex {vertex} is not binary")]
    InvalidLabel { vertex: usize, label: u8 },
    #[error("no edge between {0} and {1}")]
    UnknownEdge(usize, usize),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("models are defined on different graphs")]
    GraphMismatch,
    #[error("{n} vertices exceed the exhaustive limit of {limit}")]
    LimitExceeded { n: usize, limit: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid decomposition: {0:?}")]
    InvalidDecomposition(Vec<Violation>),
    #[error("vertex order is not a permutation of 0..{0}")]
    InvalidPermutation(usize),
    #[error("tree {tree} is not a chain monotone in the vertex order")]
    NonMonotonicTree { tree: usize },
    #[error("parameters are not supported on the tree (entry {0})")]
    NotTreeSupported(String),
    #[error("parameters are not in canonical normal form (residual {0:e})")]
    NotCanonical(f64),
    #[error("collection has {got} trees, decomposition has {expected}")]
    CollectionMismatch { expected: usize, got: usize },
    #[error("lower bound decreased in pass {pass}: {previous} -> {current}")]
    BoundDecreased {
        pass: usize,
        previous: f64,
        current: f64,
    },
    #[error("energy is not submodular on {} edge(s)", .0.len())]
    NotSubmodular(Vec<usize>),
    #[error("vertex {0} is not fixed")]
    NotFixed(usize),
    #[error("local set of {0} is empty")]
    EmptyLocalSet(String),
    #[error(
        "free subproblem with {free} vertices is neither a forest nor within the limit of {limit}"
    )]
    FreeSubproblemTooLarge { free: usize, limit: usize },
    #[error("dual point is outside the local polytope: {0:?}")]
    InfeasibleDual(Vec<PolytopeViolation>),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
