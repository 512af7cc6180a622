//! Sequential tree-reweighted message passing (TRW-S).
//!
//! The state is a set of min-normalized messages on directed edges. Together
//! with the input parameters `θ̄` they define the working reparameterization
//!
//! ```text
//! θ̂_s(j)     = θ̄_s(j) + Σ_u m_{u→s}(j)
//! θ̂_st(j, k) = θ̄_st(j, k) − m_{s→t}(k) − m_{t→s}(j)
//! ```
//!
//! and the per-tree vectors `θ(T)_s = θ̂_s / ρ_s`, `θ(T)_st = θ̂_st / ρ_st`,
//! whose weighted sum is `θ̂`. A pass sweeps the vertex order forwards and
//! then backwards; at vertex `s` every message towards a later (earlier)
//! neighbour `t` is recomputed as
//!
//! ```text
//! m_{s→t}(k) = min_j { γ_st θ̂_s(j) − m_{t→s}(j) + θ̄_st(j, k) },  γ_st = ρ_st / ρ_s
//! ```
//!
//! With every tree a chain monotone in the order, the lower bound
//! `Φ_ρ = Σ ρ(T) min θ(T)` never decreases.

use crate::decomposition::{
    build_chain_decomposition, build_edge_decomposition, distribute, order_positions,
    DecompositionKind, ThetaCollection, TreeDecomposition,
};
use crate::energy::{Assignment, EnergyModel, Graph, Parameters};
use crate::error::{Error, Result};
use crate::local_sets::{LabelSet, LocalSets, PairSet};
use crate::scalar::Real;
use crate::tree::{
    canonicalize_in_place, local_sets_from_marginals, marginals_on_tree, tree_min_energy,
};

pub const DEFAULT_STALL_WINDOW: usize = 10;
pub const DEFAULT_MAX_PASSES: usize = 5000;
pub const DEFAULT_BOUND_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub decomposition: DecompositionKind,
    /// Vertex processing order; `None` means `0..n`.
    pub order: Option<Vec<usize>>,
    /// Min-marginal gap for optimal local sets.
    pub eps_opt: T,
    /// Passes without a bound increase above `bound_tol` before stopping.
    pub stall_window: usize,
    pub max_passes: usize,
    pub bound_tol: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            decomposition: DecompositionKind::Chain,
            order: None,
            eps_opt: T::lit(crate::tree::OPTIMAL_SET_EPS),
            stall_window: DEFAULT_STALL_WINDOW,
            max_passes: DEFAULT_MAX_PASSES,
            bound_tol: T::lit(DEFAULT_BOUND_TOL),
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.stall_window < 1 {
            return Err(Error::Config("stall_window must be at least 1".into()));
        }
        if self.max_passes < 1 {
            return Err(Error::Config("max_passes must be at least 1".into()));
        }
        if !(self.eps_opt >= T::zero()) || !(self.bound_tol >= T::zero()) {
            return Err(Error::Config("tolerances must be non-negative".into()));
        }
        Ok(())
    }

    pub fn vertex_order(&self, n: usize) -> Vec<usize> {
        self.order.clone().unwrap_or_else(|| (0..n).collect())
    }

    /// Builds the decomposition this configuration asks for.
    pub fn decompose(&self, graph: &Graph) -> Result<TreeDecomposition<T>> {
        match self.decomposition {
            DecompositionKind::Edge => build_edge_decomposition(graph),
            DecompositionKind::Chain => {
                build_chain_decomposition(graph, &self.vertex_order(graph.vertex_count()))
            }
            DecompositionKind::Custom => Err(Error::Config(
                "a custom decomposition must be passed to `run` directly".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Stall,
    MaxPasses,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Stall => "stall",
            Termination::MaxPasses => "max_passes",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport<T> {
    /// Bound of the initial split, before any pass.
    pub initial_bound: T,
    /// Bound after each pass.
    pub bound_history: Vec<T>,
    pub passes_run: usize,
    pub terminated_by: Termination,
    pub wta_reached: bool,
}

impl<T: Real> SolverReport<T> {
    pub fn final_bound(&self) -> T {
        self.bound_history
            .last()
            .copied()
            .unwrap_or(self.initial_bound)
    }
}

/// Messages plus everything needed to turn them back into a collection.
#[derive(Clone, Debug)]
pub struct MessageState<T> {
    model: EnergyModel<T>,
    order: Vec<usize>,
    pos: Vec<usize>,
    rho_vertex: Vec<T>,
    rho_edge: Vec<T>,
    /// Per edge `(s, t)`, `s < t`: `[m_{s→t}, m_{t→s}]`, each indexed by the
    /// receiving vertex's label.
    messages: Vec<[[T; 2]; 2]>,
    bound: T,
    passes: usize,
}

fn check_monotone_chains<T: Real>(d: &TreeDecomposition<T>, pos: &[usize]) -> Result<()> {
    for (i, tree) in d.trees.iter().enumerate() {
        let path = tree.as_path().ok_or(Error::NonMonotonicTree { tree: i })?;
        let up = path.windows(2).all(|w| pos[w[0]] < pos[w[1]]);
        let down = path.windows(2).all(|w| pos[w[0]] > pos[w[1]]);
        if !(up || down) {
            return Err(Error::NonMonotonicTree { tree: i });
        }
    }
    Ok(())
}

impl<T: Real> MessageState<T> {
    /// All-zero messages, i.e. the plain split of the model.
    pub fn new(model: &EnergyModel<T>, d: &TreeDecomposition<T>, order: &[usize]) -> Result<Self> {
        d.ensure_valid(&model.graph)?;
        let pos = order_positions(order, model.vertex_count())?;
        check_monotone_chains(d, &pos)?;
        let zero = T::zero();
        let mut state = Self {
            rho_vertex: d.vertex_weights(model.vertex_count()),
            rho_edge: d.edge_weights(model.graph.edge_count()),
            messages: vec![[[zero; 2]; 2]; model.graph.edge_count()],
            model: model.clone(),
            order: order.to_vec(),
            pos,
            bound: zero,
            passes: 0,
        };
        state.bound = state.lower_bound(d);
        Ok(state)
    }

    pub fn model(&self) -> &EnergyModel<T> {
        &self.model
    }

    pub fn bound(&self) -> T {
        self.bound
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    /// Message from `from` to `to` along edge `e`, indexed by `to`'s label.
    pub fn message(&self, e: usize, from: usize, to: usize) -> [T; 2] {
        debug_assert_eq!(self.model.graph.edge_index(from, to), Some(e));
        self.messages[e][usize::from(from > to)]
    }

    fn belief(&self, s: usize) -> [T; 2] {
        let mut b = self.model.params.node[s];
        for &(e, u) in self.model.graph.incident(s) {
            let m = self.messages[e][usize::from(u > s)];
            b[0] += m[0];
            b[1] += m[1];
        }
        b
    }

    /// The working reparameterization `θ̂`.
    pub fn theta_hat(&self) -> Parameters<T> {
        let g = &self.model.graph;
        let mut p = self.model.params.clone();
        for s in 0..g.vertex_count() {
            p.node[s] = self.belief(s);
        }
        for (e, tab) in p.edge.iter_mut().enumerate() {
            let [down, up] = self.messages[e];
            for j in 0..2 {
                for k in 0..2 {
                    tab[j][k] -= down[k] + up[j];
                }
            }
        }
        p
    }

    /// Per-tree vectors implied by the messages (not canonicalized).
    pub fn collection(&self, d: &TreeDecomposition<T>) -> ThetaCollection<T> {
        distribute(&self.model.graph, &self.theta_hat(), d)
    }

    /// Per-tree vectors, each in canonical normal form.
    pub fn canonical_collection(&self, d: &TreeDecomposition<T>) -> ThetaCollection<T> {
        let mut c = self.collection(d);
        for (tree, p) in d.trees.iter().zip(c.per_tree.iter_mut()) {
            canonicalize_in_place(tree, p);
        }
        c
    }

    /// `Φ_ρ` of the current collection.
    pub fn lower_bound(&self, d: &TreeDecomposition<T>) -> T {
        let hat = self.theta_hat();
        let mut total = T::zero();
        for (tree, &r) in d.trees.iter().zip(&d.rho) {
            let min = tree_min_energy(
                tree,
                |v| {
                    let w = self.rho_vertex[v];
                    [hat.node[v][0] / w, hat.node[v][1] / w]
                },
                |e| {
                    let w = self.rho_edge[e];
                    let t = hat.edge[e];
                    [[t[0][0] / w, t[0][1] / w], [t[1][0] / w, t[1][1] / w]]
                },
                |_, _| true,
            );
            total += r * min;
        }
        hat.const_term + total
    }

    fn sweep(&mut self, forward: bool) {
        let n = self.order.len();
        for i in 0..n {
            let s = if forward {
                self.order[i]
            } else {
                self.order[n - 1 - i]
            };
            let b = self.belief(s);
            let g = &self.model.graph;
            for &(e, t) in g.incident(s) {
                let later = self.pos[t] > self.pos[s];
                if later != forward {
                    continue;
                }
                let gamma = self.rho_edge[e] / self.rho_vertex[s];
                let s_low = s < t;
                let incoming = self.messages[e][usize::from(s_low)];
                let tab = &self.model.params.edge[e];
                let mut out = [T::zero(); 2];
                for (k, o) in out.iter_mut().enumerate() {
                    let theta = |j: usize| if s_low { tab[j][k] } else { tab[k][j] };
                    *o = (gamma * b[0] - incoming[0] + theta(0))
                        .min2(gamma * b[1] - incoming[1] + theta(1));
                }
                let low = out[0].min2(out[1]);
                out[0] -= low;
                out[1] -= low;
                self.messages[e][usize::from(!s_low)] = out;
            }
        }
    }
}

/// `Φ_ρ(θ⃗) = Σ ρ(T) min_x E(x; θ(T))` for any tree-supported collection.
pub fn lower_bound<T: Real>(c: &ThetaCollection<T>, d: &TreeDecomposition<T>) -> Result<T> {
    if c.len() != d.len() {
        return Err(Error::CollectionMismatch {
            expected: d.len(),
            got: c.len(),
        });
    }
    let mut total = T::zero();
    for ((tree, p), &r) in d.trees.iter().zip(&c.per_tree).zip(&d.rho) {
        let min = tree_min_energy(tree, |v| p.node[v], |e| p.edge[e], |_, _| true);
        total += r * (p.const_term + min);
    }
    Ok(total)
}

/// One forward and one backward sweep; returns the new bound.
pub fn run_pass<T: Real>(
    state: &mut MessageState<T>,
    d: &TreeDecomposition<T>,
    config: &SolverConfig<T>,
) -> Result<T> {
    let previous = state.bound;
    state.sweep(true);
    state.sweep(false);
    let bound = state.lower_bound(d);
    state.passes += 1;
    if bound < previous - config.bound_tol {
        return Err(Error::BoundDecreased {
            pass: state.passes,
            previous: previous.to_f64().unwrap_or(f64::NAN),
            current: bound.to_f64().unwrap_or(f64::NAN),
        });
    }
    state.bound = bound;
    Ok(bound)
}

/// Result of the local-set pruning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WtaOutcome {
    pub sets: LocalSets,
    /// Every surviving vertex and edge set is non-empty.
    pub reached: bool,
}

/// Everything produced by a solver run.
#[derive(Clone, Debug)]
pub struct SolverRun<T> {
    pub decomposition: TreeDecomposition<T>,
    /// Per-tree vectors in canonical normal form.
    pub collection: ThetaCollection<T>,
    pub state: MessageState<T>,
    pub report: SolverReport<T>,
    pub wta: WtaOutcome,
}

impl<T: Real> SolverRun<T> {
    /// `Σ ρ(T) θ(T)` of the canonical collection.
    pub fn theta_hat(&self) -> Parameters<T> {
        crate::decomposition::combine(
            &self.collection,
            &self.decomposition,
            &self.state.model.graph,
        )
        .expect("collection built from this decomposition")
    }
}

/// Passes until the bound stalls for `stall_window` passes or `max_passes`
/// is reached.
pub fn run<T: Real>(
    model: &EnergyModel<T>,
    d: &TreeDecomposition<T>,
    config: &SolverConfig<T>,
) -> Result<SolverRun<T>> {
    config.validate()?;
    let order = config.vertex_order(model.vertex_count());
    let mut state = MessageState::new(model, d, &order)?;
    let initial_bound = state.bound();
    let mut history = Vec::new();
    let mut stalled = 0;
    let mut terminated_by = Termination::MaxPasses;
    while state.passes() < config.max_passes {
        let previous = state.bound();
        let bound = run_pass(&mut state, d, config)?;
        history.push(bound);
        if bound - previous > config.bound_tol {
            stalled = 0;
        } else {
            stalled += 1;
        }
        if stalled >= config.stall_window {
            terminated_by = Termination::Stall;
            break;
        }
    }
    let collection = state.canonical_collection(d);
    let wta = wta_local_sets(&model.graph, &collection, d, config.eps_opt)?;
    let report = SolverReport {
        initial_bound,
        passes_run: history.len(),
        bound_history: history,
        terminated_by,
        wta_reached: wta.reached,
    };
    Ok(SolverRun {
        decomposition: d.clone(),
        collection,
        state,
        report,
        wta,
    })
}

/// Builds the configured decomposition and runs the solver on it.
pub fn solve<T: Real>(model: &EnergyModel<T>, config: &SolverConfig<T>) -> Result<SolverRun<T>> {
    let d = config.decompose(&model.graph)?;
    run(model, &d, config)
}

/// Optimal local sets of each tree, pruned to the largest family that is
/// consistent across trees.
///
/// Repeats until nothing changes: vertex sets and edge sets are intersected
/// over the trees that contain them, then each tree drops pairs whose labels
/// were removed and labels left without a pair on some tree edge.
pub fn wta_local_sets<T: Real>(
    graph: &Graph,
    c: &ThetaCollection<T>,
    d: &TreeDecomposition<T>,
    eps: T,
) -> Result<WtaOutcome> {
    if c.len() != d.len() {
        return Err(Error::CollectionMismatch {
            expected: d.len(),
            got: c.len(),
        });
    }
    let n = graph.vertex_count();
    let m = graph.edge_count();
    let tv = d.trees_of_vertex(n);
    let te = d.trees_of_edge(m);
    let mut per_tree: Vec<LocalSets> = d
        .trees
        .iter()
        .zip(&c.per_tree)
        .map(|(tree, p)| local_sets_from_marginals(tree, &marginals_on_tree(tree, p), eps))
        .collect();

    loop {
        let mut changed = false;
        for (v, holders) in tv.iter().enumerate() {
            let inter = holders
                .iter()
                .fold(LabelSet::FULL, |acc, &i| acc.intersect(per_tree[i].node[v]));
            for &i in holders {
                if per_tree[i].node[v] != inter {
                    per_tree[i].node[v] = inter;
                    changed = true;
                }
            }
        }
        for (e, holders) in te.iter().enumerate() {
            let inter = holders
                .iter()
                .fold(PairSet::FULL, |acc, &i| acc.intersect(per_tree[i].edge[e]));
            for &i in holders {
                if per_tree[i].edge[e] != inter {
                    per_tree[i].edge[e] = inter;
                    changed = true;
                }
            }
        }
        for (tree, sets) in d.trees.iter().zip(per_tree.iter_mut()) {
            loop {
                let mut local = false;
                for &e in tree.edges() {
                    let (s, t) = graph.endpoints(e);
                    let pairs = sets.edge[e].restrict(sets.node[s], sets.node[t]);
                    let ns = sets.node[s].intersect(pairs.firsts());
                    let nt = sets.node[t].intersect(pairs.seconds());
                    if pairs != sets.edge[e] || ns != sets.node[s] || nt != sets.node[t] {
                        sets.edge[e] = pairs;
                        sets.node[s] = ns;
                        sets.node[t] = nt;
                        local = true;
                    }
                }
                if !local {
                    break;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut out = LocalSets::full(graph);
    for (v, holders) in tv.iter().enumerate() {
        if let Some(&i) = holders.first() {
            out.node[v] = per_tree[i].node[v];
        }
    }
    for (e, holders) in te.iter().enumerate() {
        if let Some(&i) = holders.first() {
            out.edge[e] = per_tree[i].edge[e];
        }
    }
    let reached = out.all_nonempty();
    Ok(WtaOutcome { sets: out, reached })
}

/// Tries to build one assignment that is optimal for every tree.
///
/// Labels are chosen tree by tree in breadth-first order, taking the lowest
/// label of `χ_s` compatible with every already labelled neighbour. The
/// result is returned only if it attains each tree's minimum within
/// `eps · n`, in which case it is a global minimizer.
pub fn strong_agreement<T: Real>(
    graph: &Graph,
    c: &ThetaCollection<T>,
    d: &TreeDecomposition<T>,
    chi: &LocalSets,
    eps: T,
) -> Option<Assignment> {
    let n = graph.vertex_count();
    let mut labels: Vec<Option<u8>> = vec![None; n];
    let compatible = |labels: &[Option<u8>], s: usize, j: u8| {
        graph.incident(s).iter().all(|&(e, u)| match labels[u] {
            None => true,
            Some(l) => {
                if s < u {
                    chi.edge[e].contains(j, l)
                } else {
                    chi.edge[e].contains(l, j)
                }
            }
        })
    };
    for tree in &d.trees {
        for v in tree.vertices() {
            if labels[v].is_some() {
                continue;
            }
            let j = chi.node[v].iter().find(|&j| compatible(&labels, v, j))?;
            labels[v] = Some(j);
        }
    }
    let x = Assignment(labels.into_iter().map(|l| l.unwrap_or(0)).collect());
    let slack = eps * T::from_usize(n).unwrap();
    for (tree, p) in d.trees.iter().zip(&c.per_tree) {
        let min = p.const_term + tree_min_energy(tree, |v| p.node[v], |e| p.edge[e], |_, _| true);
        if p.energy_of(graph, x.labels()) - min > slack {
            return None;
        }
    }
    Some(x)
}
