//! Exhaustive search over all `2^n` assignments.
//!
//! Every assignment is scored by direct evaluation rather than incremental
//! updates, so the reported energies are exactly `E(x; θ)` as computed by
//! [`EnergyModel::evaluate`].

use crate::energy::{Assignment, EnergyModel};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_ORACLE_LIMIT: usize = 20;
/// Energies within this distance of the minimum count as optimal.
pub const OPTIMUM_TOL: f64 = 1e-12;
/// Slack allowed when comparing a constrained minimum to the global one.
pub const PERSISTENCY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<T> {
    pub min_energy: T,
    /// Every assignment within [`OPTIMUM_TOL`] of the minimum, in
    /// lexicographic order with vertex 0 most significant.
    pub optima: Vec<Assignment>,
    /// `node_min_marginals[s][j] = min { E(x) : x_s = j }`.
    pub node_min_marginals: Vec<[T; 2]>,
    /// `edge_min_marginals[e][j][k] = min { E(x) : x_s = j, x_t = k }` for
    /// edge `e = (s, t)`, `s < t`.
    pub edge_min_marginals: Vec<[[T; 2]; 2]>,
}

fn check_limit(n: usize, limit: usize) -> Result<()> {
    if n > limit || n >= usize::BITS as usize {
        return Err(Error::LimitExceeded { n, limit });
    }
    Ok(())
}

/// Enumerates every assignment of `model`; fails when `n > limit`.
pub fn brute_solve<T: Real>(model: &EnergyModel<T>, limit: usize) -> Result<OracleResult<T>> {
    let n = model.vertex_count();
    check_limit(n, limit)?;
    let g = &model.graph;
    let inf = T::infinity();
    let mut node = vec![[inf; 2]; n];
    let mut edge = vec![[[inf; 2]; 2]; g.edge_count()];
    let mut energies = Vec::with_capacity(1 << n);
    let mut labels = vec![0u8; n];
    for code in 0..(1u64 << n) {
        for (s, l) in labels.iter_mut().enumerate() {
            *l = ((code >> (n - 1 - s)) & 1) as u8;
        }
        let e = model.params.energy_of(g, &labels);
        for (s, &l) in labels.iter().enumerate() {
            let slot = &mut node[s][l as usize];
            *slot = slot.min2(e);
        }
        for (i, &(s, t)) in g.edges().iter().enumerate() {
            let slot = &mut edge[i][labels[s] as usize][labels[t] as usize];
            *slot = slot.min2(e);
        }
        energies.push(e);
    }
    let min_energy = energies.iter().copied().fold(inf, T::min2);
    let tol = T::lit(OPTIMUM_TOL);
    let optima = energies
        .iter()
        .enumerate()
        .filter(|&(_, &e)| e - min_energy <= tol)
        .map(|(code, _)| Assignment::from_code(code as u64, n))
        .collect();
    Ok(OracleResult {
        min_energy,
        optima,
        node_min_marginals: node,
        edge_min_marginals: edge,
    })
}

/// Minimum energy over assignments agreeing with every `Some` entry of
/// `fixed`; `None` if the constraints are contradictory (never, for a
/// well-formed partial labeling).
pub fn constrained_min<T: Real>(
    model: &EnergyModel<T>,
    fixed: &[Option<u8>],
    limit: usize,
) -> Result<T> {
    let n = model.vertex_count();
    if fixed.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: fixed.len(),
        });
    }
    for (vertex, f) in fixed.iter().enumerate() {
        if let Some(label) = *f {
            if label > 1 {
                return Err(Error::InvalidLabel { vertex, label });
            }
        }
    }
    let free: Vec<usize> = (0..n).filter(|&s| fixed[s].is_none()).collect();
    check_limit(free.len(), limit)?;
    let mut labels: Vec<u8> = fixed.iter().map(|f| f.unwrap_or(0)).collect();
    let mut best = T::infinity();
    for code in 0..(1u64 << free.len()) {
        for (i, &s) in free.iter().enumerate() {
            labels[s] = ((code >> i) & 1) as u8;
        }
        best = best.min2(model.params.energy_of(&model.graph, &labels));
    }
    Ok(best)
}

/// Outcome of a weak-persistency check.
#[derive(Clone, Debug, PartialEq)]
pub struct PersistencyCheck<T> {
    pub global_min: T,
    pub constrained_min: T,
    pub holds: bool,
}

/// Checks that some global minimizer agrees with `fixed`, i.e. the
/// constrained minimum is within [`PERSISTENCY_TOL`] of the global one.
pub fn verify_weak_persistency<T: Real>(
    model: &EnergyModel<T>,
    fixed: &[Option<u8>],
    limit: usize,
) -> Result<PersistencyCheck<T>> {
    let global_min = brute_solve(model, limit)?.min_energy;
    let constrained = constrained_min(model, fixed, limit)?;
    Ok(PersistencyCheck {
        global_min,
        constrained_min: constrained,
        holds: constrained - global_min <= T::lit(PERSISTENCY_TOL),
    })
}
