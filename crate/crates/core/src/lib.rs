//! MAP inference for binary pairwise Markov random fields by sequential
//! tree-reweighted message passing, with partial-optimality and LP-dual
//! certificates and an exhaustive oracle for small models.
//!
//! Everything is generic over the scalar type through [`Real`] (`f32` or
//! `f64`); the aliases at the crate root fix it to `f64`.

// Index loops over 2×2 label tables mirror the formulas; negated comparisons
// make NaN count as a violation.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod certificate;
pub mod decomposition;
pub mod energy;
pub mod error;
pub mod instance;
pub mod local_sets;
pub mod oracle;
pub mod scalar;
pub mod tree;
pub mod trw;

pub use certificate::{
    certify, dual_solution, extend_to_full, fixed_vertices, fixed_vertices_by_threshold,
    min_marginal_gap, submodular_labelings, verify_global_optimality, verify_local_polytope,
    CertifyOptions, PartialLabeling, PolytopeViolation, Status,
};
pub use decomposition::{
    build_chain_decomposition, build_edge_decomposition, combine, split, DecompositionKind, Tree,
};
pub use energy::{Assignment, EdgeTable, Graph};
pub use error::{Error, Result};
pub use instance::{format_instance, parse_instance, read_instance, write_instance};
pub use local_sets::{LabelSet, LocalSets, PairSet};
pub use oracle::{brute_solve, constrained_min, verify_weak_persistency};
pub use scalar::Real;
pub use trw::{run, solve, strong_agreement, wta_local_sets, Termination, WtaOutcome};

pub type EnergyModel = energy::EnergyModel<f64>;
pub type Parameters = energy::Parameters<f64>;
pub type TreeDecomposition = decomposition::TreeDecomposition<f64>;
pub type ThetaCollection = decomposition::ThetaCollection<f64>;
pub type MinMarginals = tree::MinMarginals<f64>;
pub type SolverConfig = trw::SolverConfig<f64>;
pub type SolverReport = trw::SolverReport<f64>;
pub type SolverRun = trw::SolverRun<f64>;
pub type MessageState = trw::MessageState<f64>;
pub type OracleResult = oracle::OracleResult<f64>;
pub type Certificate = certificate::Certificate<f64>;
pub type DualSolution = certificate::DualSolution<f64>;
