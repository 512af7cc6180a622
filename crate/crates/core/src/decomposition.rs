//! Tree collections covering the graph, and splitting/recombining parameter
//! vectors across them.

use std::collections::VecDeque;

use crate::energy::{EnergyModel, Graph, Parameters};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A vertex of a [`Tree`] in breadth-first order from the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub vertex: usize,
    /// Position of the parent in [`Tree::nodes`] and the connecting edge.
    pub parent: Option<(usize, usize)>,
}

/// Connected acyclic subgraph of a host graph, rooted at its lowest vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    edges: Vec<usize>,
    endpoints: Vec<(usize, usize)>,
}

impl Tree {
    /// Builds a tree from host-graph edge indices, or a single vertex when
    /// `edges` is empty.
    pub fn from_edges(graph: &Graph, edges: &[usize], isolated: Option<usize>) -> Result<Self> {
        let mut vertices: Vec<usize> = Vec::new();
        for &e in edges {
            if e >= graph.edge_count() {
                return Err(Error::InvalidTree(format!("edge {e} not in graph")));
            }
            let (s, t) = graph.endpoints(e);
            vertices.push(s);
            vertices.push(t);
        }
        if edges.is_empty() {
            let v = isolated.ok_or_else(|| Error::InvalidTree("empty tree".into()))?;
            if v >= graph.vertex_count() {
                return Err(Error::InvalidTree(format!("vertex {v} not in graph")));
            }
            vertices.push(v);
        }
        vertices.sort_unstable();
        vertices.dedup();
        let mut sorted_edges = edges.to_vec();
        sorted_edges.sort_unstable();
        sorted_edges.dedup();
        if sorted_edges.len() != edges.len() {
            return Err(Error::InvalidTree("repeated edge".into()));
        }
        if sorted_edges.len() + 1 != vertices.len() {
            return Err(Error::InvalidTree(format!(
                "{} edges on {} vertices cannot form a tree",
                sorted_edges.len(),
                vertices.len()
            )));
        }

        // BFS over the given edges only
        let root = vertices[0];
        let local = |v: usize| vertices.binary_search(&v).unwrap();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); vertices.len()];
        for &e in &sorted_edges {
            let (s, t) = graph.endpoints(e);
            adj[local(s)].push((e, t));
            adj[local(t)].push((e, s));
        }
        let mut pos = vec![usize::MAX; vertices.len()];
        let mut nodes = vec![TreeNode {
            vertex: root,
            parent: None,
        }];
        pos[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(p) = queue.pop_front() {
            let v = nodes[p].vertex;
            for &(e, u) in &adj[local(v)] {
                let lu = local(u);
                if pos[lu] == usize::MAX {
                    pos[lu] = nodes.len();
                    nodes.push(TreeNode {
                        vertex: u,
                        parent: Some((p, e)),
                    });
                    queue.push_back(pos[lu]);
                }
            }
        }
        if nodes.len() != vertices.len() {
            return Err(Error::InvalidTree(
                "edges do not form a connected tree".into(),
            ));
        }
        let endpoints = sorted_edges.iter().map(|&e| graph.endpoints(e)).collect();
        Ok(Self {
            nodes,
            edges: sorted_edges,
            endpoints,
        })
    }

    pub fn singleton(graph: &Graph, vertex: usize) -> Result<Self> {
        Self::from_edges(graph, &[], Some(vertex))
    }

    /// Vertices in breadth-first order; the first one is the root.
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().map(|n| n.vertex)
    }

    /// Host-graph edge indices, sorted.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.nodes.iter().any(|n| n.vertex == v)
    }

    pub fn contains_edge(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// True when every stored edge still has the same endpoints in `graph`.
    fn is_subgraph_of(&self, graph: &Graph) -> bool {
        self.vertices().all(|v| v < graph.vertex_count())
            && self
                .edges
                .iter()
                .zip(&self.endpoints)
                .all(|(&e, &ends)| e < graph.edge_count() && graph.endpoints(e) == ends)
    }

    /// Vertices along the path if the tree is a simple path, from one end.
    pub fn as_path(&self) -> Option<Vec<usize>> {
        let mut degree = std::collections::HashMap::new();
        for &(s, t) in &self.endpoints {
            *degree.entry(s).or_insert(0usize) += 1;
            *degree.entry(t).or_insert(0usize) += 1;
        }
        if degree.values().any(|&d| d > 2) {
            return None;
        }
        if self.len() == 1 {
            return Some(vec![self.nodes[0].vertex]);
        }
        let start = *degree
            .iter()
            .filter(|(_, &d)| d == 1)
            .map(|(v, _)| v)
            .min()?;
        let mut path = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        while path.len() < self.len() {
            let next = self
                .endpoints
                .iter()
                .filter_map(|&(s, t)| match (s == cur, t == cur) {
                    (true, _) if t != prev => Some(t),
                    (_, true) if s != prev => Some(s),
                    _ => None,
                })
                .next()?;
            prev = cur;
            cur = next;
            path.push(cur);
        }
        Some(path)
    }
}

/// Which construction produced a decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecompositionKind {
    /// One tree per edge.
    Edge,
    /// Monotonic chains with respect to a vertex order.
    Chain,
    Custom,
}

/// Trees with a probability distribution over them.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeDecomposition<T> {
    pub trees: Vec<Tree>,
    pub rho: Vec<T>,
    pub kind: DecompositionKind,
}

/// Broken invariant of a decomposition.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    UncoveredEdge(usize),
    UncoveredVertex(usize),
    RhoNotNormalized(f64),
    NonPositiveRho { tree: usize },
    RhoLengthMismatch { trees: usize, rho: usize },
    NotSubgraph { tree: usize },
}

fn uniform<T: Real>(trees: Vec<Tree>, kind: DecompositionKind) -> TreeDecomposition<T> {
    let w = T::one() / T::from_usize(trees.len()).unwrap();
    TreeDecomposition {
        rho: vec![w; trees.len()],
        trees,
        kind,
    }
}

/// One tree per edge plus a singleton tree for every isolated vertex, with
/// uniform weights.
pub fn build_edge_decomposition<T: Real>(graph: &Graph) -> Result<TreeDecomposition<T>> {
    if graph.edge_count() == 0 {
        return Err(Error::InvalidGraph("graph has no edges".into()));
    }
    let mut trees = Vec::with_capacity(graph.edge_count());
    for e in 0..graph.edge_count() {
        trees.push(Tree::from_edges(graph, &[e], None)?);
    }
    for v in (0..graph.vertex_count()).filter(|&v| graph.degree(v) == 0) {
        trees.push(Tree::singleton(graph, v)?);
    }
    Ok(uniform(trees, DecompositionKind::Edge))
}

/// Validates `order` and returns each vertex's position in it.
pub fn order_positions(order: &[usize], n: usize) -> Result<Vec<usize>> {
    if order.len() != n {
        return Err(Error::InvalidPermutation(n));
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return Err(Error::InvalidPermutation(n));
        }
        pos[v] = i;
    }
    Ok(pos)
}

/// Chains that are monotonic in `order` and cover every edge exactly once.
///
/// Vertices are visited in order. A chain ending at the current vertex is
/// extended through an uncovered edge only if the step (difference of order
/// positions) repeats the chain's last step; every remaining uncovered edge
/// to a later vertex opens a new chain. On a row-major grid this yields the
/// rows and the columns.
pub fn build_chain_decomposition<T: Real>(
    graph: &Graph,
    order: &[usize],
) -> Result<TreeDecomposition<T>> {
    let n = graph.vertex_count();
    let pos = order_positions(order, n)?;
    if graph.edge_count() == 0 {
        return Err(Error::InvalidGraph("graph has no edges".into()));
    }
    let mut covered = vec![false; graph.edge_count()];
    // (vertex sequence, edge sequence)
    let mut chains: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut ending_at: Vec<Vec<usize>> = vec![Vec::new(); n];

    for &v in order {
        let mut forward: Vec<(usize, usize)> = graph
            .incident(v)
            .iter()
            .copied()
            .filter(|&(_, u)| pos[u] > pos[v])
            .collect();
        forward.sort_by_key(|&(_, u)| pos[u]);

        for c in std::mem::take(&mut ending_at[v]) {
            let verts = &chains[c].0;
            let prev = verts[verts.len() - 2];
            let step = pos[v] - pos[prev];
            let next = forward
                .iter()
                .copied()
                .find(|&(e, u)| !covered[e] && pos[u] - pos[v] == step);
            if let Some((e, u)) = next {
                covered[e] = true;
                chains[c].0.push(u);
                chains[c].1.push(e);
                ending_at[u].push(c);
            }
        }
        for &(e, u) in &forward {
            if !covered[e] {
                covered[e] = true;
                ending_at[u].push(chains.len());
                chains.push((vec![v, u], vec![e]));
            }
        }
    }

    let mut trees = Vec::with_capacity(chains.len());
    for (_, edges) in &chains {
        trees.push(Tree::from_edges(graph, edges, None)?);
    }
    for v in (0..n).filter(|&v| graph.degree(v) == 0) {
        trees.push(Tree::singleton(graph, v)?);
    }
    Ok(uniform(trees, DecompositionKind::Chain))
}

impl<T: Real> TreeDecomposition<T> {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Checks all invariants against `graph`; empty means valid.
    pub fn validate(&self, graph: &Graph) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.rho.len() != self.trees.len() {
            out.push(Violation::RhoLengthMismatch {
                trees: self.trees.len(),
                rho: self.rho.len(),
            });
        }
        for (i, r) in self.rho.iter().enumerate() {
            if !(*r > T::zero()) {
                out.push(Violation::NonPositiveRho { tree: i });
            }
        }
        let total: T = self.rho.iter().copied().sum();
        if (total - T::one()).abs() > T::lit(1e-12) {
            out.push(Violation::RhoNotNormalized(
                total.to_f64().unwrap_or(f64::NAN),
            ));
        }
        let mut edge_cover = vec![false; graph.edge_count()];
        let mut vertex_cover = vec![false; graph.vertex_count()];
        for (i, tree) in self.trees.iter().enumerate() {
            if !tree.is_subgraph_of(graph) {
                out.push(Violation::NotSubgraph { tree: i });
                continue;
            }
            for &e in tree.edges() {
                edge_cover[e] = true;
            }
            for v in tree.vertices() {
                vertex_cover[v] = true;
            }
        }
        out.extend(
            edge_cover
                .iter()
                .enumerate()
                .filter(|(_, c)| !**c)
                .map(|(e, _)| Violation::UncoveredEdge(e)),
        );
        out.extend(
            vertex_cover
                .iter()
                .enumerate()
                .filter(|(_, c)| !**c)
                .map(|(v, _)| Violation::UncoveredVertex(v)),
        );
        out
    }

    pub(crate) fn ensure_valid(&self, graph: &Graph) -> Result<()> {
        let v = self.validate(graph);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidDecomposition(v))
        }
    }

    /// `Σ_{T ∋ s} ρ(T)` for every vertex.
    pub fn vertex_weights(&self, n: usize) -> Vec<T> {
        let mut w = vec![T::zero(); n];
        for (tree, &r) in self.trees.iter().zip(&self.rho) {
            for v in tree.vertices() {
                w[v] += r;
            }
        }
        w
    }

    /// `Σ_{T ∋ e} ρ(T)` for every edge.
    pub fn edge_weights(&self, m: usize) -> Vec<T> {
        let mut w = vec![T::zero(); m];
        for (tree, &r) in self.trees.iter().zip(&self.rho) {
            for &e in tree.edges() {
                w[e] += r;
            }
        }
        w
    }

    /// Trees containing each vertex.
    pub fn trees_of_vertex(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); n];
        for (i, tree) in self.trees.iter().enumerate() {
            for v in tree.vertices() {
                out[v].push(i);
            }
        }
        out
    }

    /// Trees containing each edge.
    pub fn trees_of_edge(&self, m: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); m];
        for (i, tree) in self.trees.iter().enumerate() {
            for &e in tree.edges() {
                out[e].push(i);
            }
        }
        out
    }
}

/// One tree-supported parameter vector per tree of a decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaCollection<T> {
    pub per_tree: Vec<Parameters<T>>,
}

impl<T: Real> ThetaCollection<T> {
    pub fn len(&self) -> usize {
        self.per_tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_tree.is_empty()
    }
}

/// Builds `θ(T)` from per-vertex and per-edge "shared" parameters `shared`:
/// every tree containing `s` gets `shared_s / ν_s` and likewise for edges, so
/// that `Σ ρ(T) θ(T)` restores `shared` on every vertex and edge. Each tree's
/// constant is `shared.const_term`.
pub(crate) fn distribute<T: Real>(
    graph: &Graph,
    shared: &Parameters<T>,
    d: &TreeDecomposition<T>,
) -> ThetaCollection<T> {
    let nu_v = d.vertex_weights(graph.vertex_count());
    let nu_e = d.edge_weights(graph.edge_count());
    let per_tree = d
        .trees
        .iter()
        .map(|tree| {
            let mut p = Parameters::zeros(graph);
            p.const_term = shared.const_term;
            for v in tree.vertices() {
                for j in 0..2 {
                    p.node[v][j] = shared.node[v][j] / nu_v[v];
                }
            }
            for &e in tree.edges() {
                for j in 0..2 {
                    for k in 0..2 {
                        p.edge[e][j][k] = shared.edge[e][j][k] / nu_e[e];
                    }
                }
            }
            p
        })
        .collect();
    ThetaCollection { per_tree }
}

/// Splits the model's parameters across the trees (`θ(T)_s = θ̄_s / ν_s`,
/// `θ(T)_st = θ̄_st / ν_st`, `θ(T)_const = θ̄_const`).
pub fn split<T: Real>(
    model: &EnergyModel<T>,
    d: &TreeDecomposition<T>,
) -> Result<ThetaCollection<T>> {
    d.ensure_valid(&model.graph)?;
    Ok(distribute(&model.graph, &model.params, d))
}

/// `Σ ρ(T) θ(T)` over the full index set.
pub fn combine<T: Real>(
    c: &ThetaCollection<T>,
    d: &TreeDecomposition<T>,
    graph: &Graph,
) -> Result<Parameters<T>> {
    if c.len() != d.len() {
        return Err(Error::CollectionMismatch {
            expected: d.len(),
            got: c.len(),
        });
    }
    let mut out = Parameters::zeros(graph);
    for (p, &r) in c.per_tree.iter().zip(&d.rho) {
        if !p.matches(graph) {
            return Err(Error::GraphMismatch);
        }
        out.add_scaled(p, r);
    }
    Ok(out)
}
