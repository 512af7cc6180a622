//! Statements that follow from a weak-tree-agreement fixed point: persistent
//! vertices, min-marginal gaps, optimal completions and an LP-dual point whose
//! value matches the lower bound.

use std::fmt::{self, Write as _};

use crate::decomposition::{combine, ThetaCollection, TreeDecomposition};
use crate::energy::{check_reparameterization, Assignment, EnergyModel, Graph, Parameters};
use crate::error::{Error, Result};
use crate::local_sets::{LocalSets, PairSet};
use crate::oracle::{brute_solve, constrained_min, PERSISTENCY_TOL};
use crate::scalar::{Real, ENERGY_TOL};
use crate::tree::decode_tree_optimum;
use crate::trw::{lower_bound, SolverRun};

/// `|θ̂_{s;0} − θ̂_{s;1}|` above which a vertex counts as fixed.
pub const FIX_THRESHOLD: f64 = 1e-6;
/// Tolerance on every local-polytope constraint.
pub const POLYTOPE_TOL: f64 = 1e-12;
/// Allowed difference between the lower bound and the dual value.
pub const DUALITY_TOL: f64 = 1e-7;

/// Labels for the fixed vertices; `None` marks a free vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialLabeling(pub Vec<Option<u8>>);

impl PartialLabeling {
    pub fn free(n: usize) -> Self {
        Self(vec![None; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, s: usize) -> Option<u8> {
        self.0[s]
    }

    pub fn as_slice(&self) -> &[Option<u8>] {
        &self.0
    }

    pub fn fixed(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(s, l)| l.map(|l| (s, l)))
    }

    pub fn free_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_none())
            .map(|(s, _)| s)
    }

    pub fn fixed_count(&self) -> usize {
        self.0.iter().filter(|l| l.is_some()).count()
    }

    pub fn agrees_with(&self, x: &Assignment) -> bool {
        self.fixed().all(|(s, l)| x.get(s) == l)
    }

    /// Fixed labels, with every free vertex set to `fill`.
    pub fn fill(&self, fill: u8) -> Assignment {
        Assignment(self.0.iter().map(|l| l.unwrap_or(fill)).collect())
    }
}

/// Vertices whose optimal local set is a single label.
pub fn fixed_vertices(chi: &LocalSets) -> PartialLabeling {
    PartialLabeling(chi.node.iter().map(|set| set.only()).collect())
}

/// Vertices whose reparameterized node entries differ by more than
/// `threshold`, fixed to the smaller one.
pub fn fixed_vertices_by_threshold<T: Real>(
    theta_hat: &Parameters<T>,
    threshold: T,
) -> PartialLabeling {
    PartialLabeling(
        theta_hat
            .node
            .iter()
            .map(|th| {
                if (th[0] - th[1]).abs() > threshold {
                    Some(u8::from(th[1] < th[0]))
                } else {
                    None
                }
            })
            .collect(),
    )
}

/// Completes `partial` to a global minimizer by solving the free subgraph
/// exactly: tree decoding on forest components, exhaustive search on others
/// of at most `limit` vertices.
pub fn extend_to_full<T: Real>(
    model: &EnergyModel<T>,
    partial: &PartialLabeling,
    limit: usize,
) -> Result<Assignment> {
    let g = &model.graph;
    let n = g.vertex_count();
    if partial.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: partial.len(),
        });
    }
    let mut x = partial.fill(0);

    // Connected components of the free subgraph.
    let mut component = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in partial.free_vertices() {
        if component[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        component[start] = id;
        let mut i = 0;
        while i < members.len() {
            let s = members[i];
            for &(_, u) in g.incident(s) {
                if partial.get(u).is_none() && component[u] == usize::MAX {
                    component[u] = id;
                    members.push(u);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        components.push(members);
    }

    for members in &components {
        let mut local = vec![usize::MAX; n];
        for (i, &s) in members.iter().enumerate() {
            local[s] = i;
        }
        let mut edges = Vec::new();
        let mut tables = Vec::new();
        let mut node: Vec<[T; 2]> = members.iter().map(|&s| model.params.node[s]).collect();
        for &s in members {
            for &(e, u) in g.incident(s) {
                let tab = model.params.edge[e];
                match partial.get(u) {
                    Some(l) => {
                        let l = l as usize;
                        for j in 0..2 {
                            node[local[s]][j] += if s < u { tab[j][l] } else { tab[l][j] };
                        }
                    }
                    None if s < u => {
                        edges.push((local[s], local[u]));
                        tables.push(tab);
                    }
                    None => {}
                }
            }
        }
        let k = members.len();
        let sub_graph = Graph::new(k, edges.iter().copied())?;
        let mut params = Parameters::zeros(&sub_graph);
        params.node = node;
        for (&(s, t), tab) in edges.iter().zip(tables) {
            params.set_edge(&sub_graph, s, t, tab)?;
        }
        let sub = EnergyModel::new(sub_graph, params)?;
        let labels = if sub.graph.edge_count() + 1 == k {
            let all: Vec<usize> = (0..sub.graph.edge_count()).collect();
            let tree =
                crate::decomposition::Tree::from_edges(&sub.graph, &all, (k == 1).then_some(0))?;
            decode_tree_optimum(&tree, &sub.params)?
        } else if k <= limit {
            brute_solve(&sub, limit)?.optima.swap_remove(0)
        } else {
            return Err(Error::FreeSubproblemTooLarge { free: k, limit });
        };
        for (i, &s) in members.iter().enumerate() {
            x.0[s] = labels.get(i);
        }
    }
    Ok(x)
}

/// The two completions of a partial labeling on a submodular model: every
/// free vertex set to 0, and every free vertex set to 1.
pub fn submodular_labelings<T: Real>(
    model: &EnergyModel<T>,
    partial: &PartialLabeling,
) -> Result<(Assignment, Assignment)> {
    let report = model.submodularity();
    if !report.submodular {
        return Err(Error::NotSubmodular(
            report.violations.iter().map(|&(e, _)| e).collect(),
        ));
    }
    if partial.len() != model.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: model.vertex_count(),
            got: partial.len(),
        });
    }
    Ok((partial.fill(0), partial.fill(1)))
}

/// `C = Σ ρ(T) θ(T)_{s;1−j}` for a vertex fixed to `j`; lower-bounds how
/// much clamping `s` to the other label raises the minimum.
pub fn min_marginal_gap<T: Real>(
    c: &ThetaCollection<T>,
    d: &TreeDecomposition<T>,
    partial: &PartialLabeling,
    s: usize,
) -> Result<T> {
    let j = partial.get(s).ok_or(Error::NotFixed(s))?;
    let other = 1 - j as usize;
    let mut gap = T::zero();
    for ((tree, p), &r) in d.trees.iter().zip(&c.per_tree).zip(&d.rho) {
        if tree.contains_vertex(s) {
            gap += r * p.node[s][other];
        }
    }
    Ok(gap)
}

/// A point of the local polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution<T> {
    pub tau_const: T,
    pub node: Vec<[T; 2]>,
    pub edge: Vec<[[T; 2]; 2]>,
}

impl<T: Real> DualSolution<T> {
    /// `⟨θ, τ⟩` over constant, node and edge entries.
    pub fn value(&self, theta: &Parameters<T>) -> T {
        let as_params = Parameters {
            const_term: self.tau_const,
            node: self.node.clone(),
            edge: self.edge.clone(),
        };
        theta.dot(&as_params)
    }
}

/// Which edge rule produced an edge's dual entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeRule {
    /// A single pair gets all the mass.
    Single,
    /// `{(j,0), (j,1)}`: half on each.
    SharedFirst,
    /// `{(0,k), (1,k)}`: half on each.
    SharedSecond,
    /// A diagonal or anti-diagonal pair is contained: half on each.
    Diagonal,
}

fn edge_rule(set: PairSet) -> Result<(EdgeRule, [[f64; 2]; 2])> {
    let mut tau = [[0.0; 2]; 2];
    let pairs: Vec<(u8, u8)> = set.iter().collect();
    let first = set.firsts();
    let second = set.seconds();
    let diagonal = [(0u8, 0u8), (0, 1)]
        .into_iter()
        .find(|&(j, k)| set.contains(j, k) && set.contains(1 - j, 1 - k));
    let mut matched = Vec::new();
    if pairs.len() == 1 {
        matched.push(EdgeRule::Single);
    }
    if pairs.len() == 2 && first.len() == 1 {
        matched.push(EdgeRule::SharedFirst);
    }
    if pairs.len() == 2 && second.len() == 1 {
        matched.push(EdgeRule::SharedSecond);
    }
    if diagonal.is_some() {
        matched.push(EdgeRule::Diagonal);
    }
    if matched.len() != 1 {
        return Err(Error::EmptyLocalSet(format!(
            "edge set {set:?} matches {} dual rules",
            matched.len()
        )));
    }
    match matched[0] {
        EdgeRule::Single => {
            let (j, k) = pairs[0];
            tau[j as usize][k as usize] = 1.0;
        }
        EdgeRule::SharedFirst | EdgeRule::SharedSecond => {
            for (j, k) in pairs {
                tau[j as usize][k as usize] = 0.5;
            }
        }
        EdgeRule::Diagonal => {
            let (j, k) = diagonal.expect("matched");
            tau[j as usize][k as usize] = 0.5;
            tau[1 - j as usize][1 - k as usize] = 0.5;
        }
    }
    Ok((matched[0], tau))
}

/// Builds the dual point from optimal local sets: a singleton vertex set
/// gets mass 1, a full one 1/2 per label; edges follow [`EdgeRule`].
pub fn dual_solution<T: Real>(graph: &Graph, chi: &LocalSets) -> Result<DualSolution<T>> {
    if chi.node.len() != graph.vertex_count() || chi.edge.len() != graph.edge_count() {
        return Err(Error::DimensionMismatch {
            expected: graph.vertex_count(),
            got: chi.node.len(),
        });
    }
    let mut node = Vec::with_capacity(chi.node.len());
    for (s, &set) in chi.node.iter().enumerate() {
        let tau = match set.len() {
            0 => return Err(Error::EmptyLocalSet(format!("vertex {s}"))),
            1 => {
                let mut t = [T::zero(); 2];
                t[set.only().expect("singleton") as usize] = T::one();
                t
            }
            _ => [T::lit(0.5); 2],
        };
        node.push(tau);
    }
    let mut edge = Vec::with_capacity(chi.edge.len());
    for (e, &set) in chi.edge.iter().enumerate() {
        if set.is_empty() {
            let (s, t) = graph.endpoints(e);
            return Err(Error::EmptyLocalSet(format!("edge ({s}, {t})")));
        }
        let (_, tau) = edge_rule(set)?;
        edge.push(tau.map(|row| row.map(T::lit)));
    }
    Ok(DualSolution {
        tau_const: T::one(),
        node,
        edge,
    })
}

/// A violated local-polytope constraint.
#[derive(Clone, Debug, PartialEq)]
pub enum PolytopeViolation {
    ConstNotOne(f64),
    Negative {
        entry: String,
        value: f64,
    },
    NodeNormalization {
        vertex: usize,
        sum: f64,
    },
    /// `Σ_j τ_{st;jk} ≠ τ_{t;k}` (or the mirrored constraint towards `s`).
    Marginalization {
        edge: usize,
        toward: usize,
        label: u8,
        gap: f64,
    },
    Shape,
}

impl fmt::Display for PolytopeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolytopeViolation::ConstNotOne(v) => write!(f, "constant entry is {v}"),
            PolytopeViolation::Negative { entry, value } => {
                write!(f, "non-negativity: {entry} = {value}")
            }
            PolytopeViolation::NodeNormalization { vertex, sum } => {
                write!(f, "node normalization: vertex {vertex} sums to {sum}")
            }
            PolytopeViolation::Marginalization {
                edge,
                toward,
                label,
                gap,
            } => write!(
                f,
                "marginalization: edge {edge} toward vertex {toward}, label {label}, off by {gap}"
            ),
            PolytopeViolation::Shape => write!(f, "dual point does not match the graph"),
        }
    }
}

/// Every local-polytope constraint violated by more than [`POLYTOPE_TOL`].
pub fn verify_local_polytope<T: Real>(
    tau: &DualSolution<T>,
    graph: &Graph,
) -> Vec<PolytopeViolation> {
    if tau.node.len() != graph.vertex_count() || tau.edge.len() != graph.edge_count() {
        return vec![PolytopeViolation::Shape];
    }
    let tol = POLYTOPE_TOL;
    let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
    let mut out = Vec::new();
    if !((f(tau.tau_const) - 1.0).abs() <= tol) {
        out.push(PolytopeViolation::ConstNotOne(f(tau.tau_const)));
    }
    for (s, t) in tau.node.iter().enumerate() {
        for j in 0..2 {
            if !(f(t[j]) >= -tol) {
                out.push(PolytopeViolation::Negative {
                    entry: format!("tau[{s};{j}]"),
                    value: f(t[j]),
                });
            }
        }
        let sum = f(t[0] + t[1]);
        if !((sum - 1.0).abs() <= tol) {
            out.push(PolytopeViolation::NodeNormalization { vertex: s, sum });
        }
    }
    for (e, tab) in tau.edge.iter().enumerate() {
        let (s, t) = graph.endpoints(e);
        for j in 0..2 {
            for k in 0..2 {
                if !(f(tab[j][k]) >= -tol) {
                    out.push(PolytopeViolation::Negative {
                        entry: format!("tau[{s}{t};{j}{k}]"),
                        value: f(tab[j][k]),
                    });
                }
            }
        }
        for l in 0..2 {
            let toward_t = f(tab[0][l] + tab[1][l] - tau.node[t][l]);
            if !(toward_t.abs() <= tol) {
                out.push(PolytopeViolation::Marginalization {
                    edge: e,
                    toward: t,
                    label: l as u8,
                    gap: toward_t,
                });
            }
            let toward_s = f(tab[l][0] + tab[l][1] - tau.node[s][l]);
            if !(toward_s.abs() <= tol) {
                out.push(PolytopeViolation::Marginalization {
                    edge: e,
                    toward: s,
                    label: l as u8,
                    gap: toward_s,
                });
            }
        }
    }
    out
}

/// Primal and dual values of a candidate optimum pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityCheck<T> {
    /// `Φ_ρ` of the collection.
    pub primal: T,
    /// `⟨θ̄, τ⟩` with the original parameters.
    pub dual: T,
    pub optimal: bool,
}

/// Compares `Φ_ρ(θ⃗)` with `⟨θ̄, τ⟩`; equality within [`DUALITY_TOL`]
/// certifies that the collection maximizes the bound.
pub fn verify_global_optimality<T: Real>(
    model: &EnergyModel<T>,
    c: &ThetaCollection<T>,
    d: &TreeDecomposition<T>,
    tau: &DualSolution<T>,
) -> Result<DualityCheck<T>> {
    let violations = verify_local_polytope(tau, &model.graph);
    if !violations.is_empty() {
        return Err(Error::InfeasibleDual(violations));
    }
    let primal = lower_bound(c, d)?;
    let dual = tau.value(&model.params);
    Ok(DualityCheck {
        primal,
        dual,
        optimal: (primal - dual).abs() <= T::lit(DUALITY_TOL),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }

    fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One checked claim of a certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct Statement {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

/// Options for [`certify`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    /// Largest vertex count handed to exhaustive search.
    pub oracle_limit: usize,
    pub fix_threshold: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            oracle_limit: crate::oracle::DEFAULT_ORACLE_LIMIT,
            fix_threshold: FIX_THRESHOLD,
        }
    }
}

/// Everything derived from one solver run, with the checks performed on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<T> {
    pub vertex_count: usize,
    pub wta_reached: bool,
    /// Fixed by singleton optimal local sets (empty unless WTA was reached).
    pub partial: PartialLabeling,
    /// Fixed by the node-difference threshold.
    pub threshold_partial: PartialLabeling,
    pub bound: T,
    pub dual: Option<DualSolution<T>>,
    pub dual_value: Option<T>,
    /// `(vertex, label, C)` per fixed vertex.
    pub gaps: Vec<(usize, u8, T)>,
    pub labeling: Option<Assignment>,
    pub labeling_energy: Option<T>,
    pub statements: Vec<Statement>,
}

impl<T: Real> Certificate<T> {
    pub fn all_passed(&self) -> bool {
        self.statements.iter().all(|s| s.status != Status::Fail)
    }

    pub fn statement(&self, name: &str) -> Option<&Statement> {
        self.statements.iter().find(|s| s.name == name)
    }

    /// Line-oriented report; one `PASS`/`FAIL`/`SKIP` line per statement.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "certificate 1");
        let _ = writeln!(out, "vertices {}", self.vertex_count);
        let _ = writeln!(out, "bound {}", self.bound);
        match self.dual_value {
            Some(v) => {
                let _ = writeln!(out, "dual {v}");
            }
            None => {
                let _ = writeln!(out, "dual -");
            }
        }
        let _ = writeln!(
            out,
            "wta {}",
            if self.wta_reached {
                "reached"
            } else {
                "not-reached"
            }
        );
        let _ = writeln!(out, "fixed {}", self.partial.fixed_count());
        for &(s, j, c) in &self.gaps {
            let _ = writeln!(out, "fix {s} {j} gap {c}");
        }
        if let (Some(x), Some(e)) = (&self.labeling, self.labeling_energy) {
            let bits: String = x.labels().iter().map(|l| char::from(b'0' + l)).collect();
            let _ = writeln!(out, "labeling {bits} energy {e}");
        }
        for st in &self.statements {
            let _ = writeln!(out, "{} {} {}", st.status.as_str(), st.name, st.detail);
        }
        out
    }
}

fn oracle_available(n: usize, limit: usize) -> bool {
    n <= limit
}

/// Derives and checks every certificate statement for a finished run.
pub fn certify<T: Real>(
    model: &EnergyModel<T>,
    run: &SolverRun<T>,
    opts: &CertifyOptions,
) -> Result<Certificate<T>> {
    let g = &model.graph;
    let n = g.vertex_count();
    let c = &run.collection;
    let d = &run.decomposition;
    let chi = &run.wta.sets;
    let wta = run.wta.reached;
    let bound = lower_bound(c, d)?;
    let theta_hat = combine(c, d, g)?;
    let tol = T::lit(DUALITY_TOL);
    let oracle = if oracle_available(n, opts.oracle_limit) {
        Some(brute_solve(model, opts.oracle_limit)?)
    } else {
        None
    };
    let mut statements = Vec::new();

    let hat_model = EnergyModel::new(g.clone(), theta_hat.clone())?;
    let invariants_ok = model
        .edge_invariants()
        .iter()
        .zip(hat_model.edge_invariants())
        .all(|(&a, b)| (a - b).abs() <= T::lit(ENERGY_TOL));
    let exhaustive =
        check_reparameterization(model, &hat_model, opts.oracle_limit, T::lit(ENERGY_TOL));
    let (status, detail) = match exhaustive {
        Ok(same) => (Status::of(same && invariants_ok), "exhaustive".to_string()),
        Err(Error::LimitExceeded { .. }) => {
            (Status::of(invariants_ok), "edge invariants".to_string())
        }
        Err(e) => return Err(e),
    };
    statements.push(Statement {
        name: "reparameterization",
        status,
        detail,
    });

    statements.push(Statement {
        name: "bound-below-minimum",
        status: match &oracle {
            Some(o) => Status::of(bound <= o.min_energy + T::lit(ENERGY_TOL)),
            None => Status::Skip,
        },
        detail: match &oracle {
            Some(o) => format!("bound {bound} minimum {}", o.min_energy),
            None => "no oracle".into(),
        },
    });

    let partial = if wta {
        fixed_vertices(chi)
    } else {
        PartialLabeling::free(n)
    };
    let threshold_partial = fixed_vertices_by_threshold(&theta_hat, T::lit(opts.fix_threshold));

    if !wta {
        for name in [
            "local-sets-consistent",
            "dual-feasible",
            "duality-gap",
            "persistency",
            "min-marginal-gaps",
            "full-labeling",
            "submodular-completions",
        ] {
            statements.push(Statement {
                name,
                status: Status::Skip,
                detail: "weak tree agreement not reached".into(),
            });
        }
        statements.push(persistency_statement(
            "threshold-persistency",
            model,
            &threshold_partial,
            oracle.as_ref().map(|o| o.min_energy),
            opts,
        )?);
        return Ok(Certificate {
            vertex_count: n,
            wta_reached: false,
            partial,
            threshold_partial,
            bound,
            dual: None,
            dual_value: None,
            gaps: Vec::new(),
            labeling: None,
            labeling_energy: None,
            statements,
        });
    }

    let inconsistencies = chi.inconsistencies(g);
    statements.push(Statement {
        name: "local-sets-consistent",
        status: Status::of(inconsistencies.is_empty()),
        detail: format!("{} inconsistencies", inconsistencies.len()),
    });

    let dual = dual_solution::<T>(g, chi)?;
    let violations = verify_local_polytope(&dual, g);
    statements.push(Statement {
        name: "dual-feasible",
        status: Status::of(violations.is_empty()),
        detail: format!("{} violations", violations.len()),
    });
    let dual_value = dual.value(&model.params);
    statements.push(Statement {
        name: "duality-gap",
        status: Status::of((bound - dual_value).abs() <= tol),
        detail: format!(
            "gap {:e}",
            (bound - dual_value).abs().to_f64().unwrap_or(f64::NAN)
        ),
    });

    statements.push(persistency_statement(
        "persistency",
        model,
        &partial,
        oracle.as_ref().map(|o| o.min_energy),
        opts,
    )?);
    statements.push(persistency_statement(
        "threshold-persistency",
        model,
        &threshold_partial,
        oracle.as_ref().map(|o| o.min_energy),
        opts,
    )?);

    let mut gaps = Vec::new();
    for (s, j) in partial.fixed() {
        gaps.push((s, j, min_marginal_gap(c, d, &partial, s)?));
    }
    statements.push(match &oracle {
        Some(o) => {
            let strict = T::lit(crate::tree::OPTIMAL_SET_EPS);
            let bad = gaps
                .iter()
                .filter(|&&(s, j, gap)| {
                    let other = o.node_min_marginals[s][1 - j as usize];
                    let below = other - o.min_energy < gap - T::lit(PERSISTENCY_TOL);
                    let not_strict = gap > strict && o.optima.iter().any(|x| x.get(s) != j);
                    below || not_strict
                })
                .count();
            Statement {
                name: "min-marginal-gaps",
                status: Status::of(bad == 0),
                detail: format!("{bad} of {} vertices violate", gaps.len()),
            }
        }
        None => Statement {
            name: "min-marginal-gaps",
            status: Status::Skip,
            detail: "no oracle".into(),
        },
    });

    let reference = oracle.as_ref().map(|o| o.min_energy);
    let (labeling, labeling_energy) = match extend_to_full(model, &partial, opts.oracle_limit) {
        Ok(x) => {
            let e = model.evaluate(&x)?;
            let status = match reference {
                Some(min) => Status::of((e - min).abs() <= tol),
                None if e - bound <= tol => Status::Pass,
                None => Status::Skip,
            };
            statements.push(Statement {
                name: "full-labeling",
                status,
                detail: format!("energy {e}"),
            });
            (Some(x), Some(e))
        }
        Err(Error::FreeSubproblemTooLarge { free, limit }) => {
            statements.push(Statement {
                name: "full-labeling",
                status: Status::Skip,
                detail: format!("free component of {free} vertices exceeds limit {limit}"),
            });
            (None, None)
        }
        Err(e) => return Err(e),
    };

    statements.push(match submodular_labelings(model, &partial) {
        Ok((x, y)) => {
            let ex = model.evaluate(&x)?;
            let ey = model.evaluate(&y)?;
            let target = reference.unwrap_or(bound);
            Statement {
                name: "submodular-completions",
                status: Status::of((ex - target).abs() <= tol && (ey - target).abs() <= tol),
                detail: format!("energies {ex} {ey}"),
            }
        }
        Err(Error::NotSubmodular(edges)) => Statement {
            name: "submodular-completions",
            status: Status::Skip,
            detail: format!("{} non-submodular edges", edges.len()),
        },
        Err(e) => return Err(e),
    });

    Ok(Certificate {
        vertex_count: n,
        wta_reached: true,
        partial,
        threshold_partial,
        bound,
        dual: Some(dual),
        dual_value: Some(dual_value),
        gaps,
        labeling,
        labeling_energy,
        statements,
    })
}

fn persistency_statement<T: Real>(
    name: &'static str,
    model: &EnergyModel<T>,
    partial: &PartialLabeling,
    min: Option<T>,
    opts: &CertifyOptions,
) -> Result<Statement> {
    Ok(match min {
        Some(min) => {
            let constrained = constrained_min(model, partial.as_slice(), opts.oracle_limit)?;
            Statement {
                name,
                status: Status::of(constrained - min <= T::lit(PERSISTENCY_TOL)),
                detail: format!(
                    "{} fixed, constrained minimum {constrained}",
                    partial.fixed_count()
                ),
            }
        }
        None => Statement {
            name,
            status: Status::Skip,
            detail: "no oracle".into(),
        },
    })
}
