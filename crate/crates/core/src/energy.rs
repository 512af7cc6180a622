//! Graphs, parameter vectors in the overcomplete representation, and energy
//! evaluation.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::{Real, ENERGY_TOL};

/// Undirected simple graph on vertices `0..vertex_count`.
///
/// Edges are stored once with `s < t`; the edge index is the position in
/// [`Graph::edges`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
    index: HashMap<(usize, usize), usize>,
}

impl Graph {
    /// Builds a graph, normalizing each edge to `s < t`.
    pub fn new(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut list = Vec::new();
        let mut index = HashMap::new();
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) has an endpoint >= {vertex_count}"
                )));
            }
            let key = (a.min(b), a.max(b));
            if index.contains_key(&key) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
            let e = list.len();
            index.insert(key, e);
            list.push(key);
            adjacency[key.0].push((e, key.1));
            adjacency[key.1].push((e, key.0));
        }
        Ok(Self {
            vertex_count,
            edges: list,
            adjacency,
            index,
        })
    }

    /// `rows x cols` grid with 4-nearest-neighbour edges, vertices row-major.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        let id = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((id(r, c), id(r, c + 1)));
                }
                if r + 1 < rows {
                    edges.push((id(r, c), id(r + 1, c)));
                }
            }
        }
        Self::new(rows * cols, edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|s| (s + 1..n).map(move |t| (s, t)));
        Self::new(n, edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|t| (t - 1, t)))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Incident edges of `s` as `(edge index, neighbour)` pairs.
    pub fn incident(&self, s: usize) -> &[(usize, usize)] {
        &self.adjacency[s]
    }

    pub fn degree(&self, s: usize) -> usize {
        self.adjacency[s].len()
    }

    pub fn edge_index(&self, s: usize, t: usize) -> Option<usize> {
        self.index.get(&(s.min(t), s.max(t))).copied()
    }
}

/// 2x2 table indexed `[j][k]` with `j` the label of the lower endpoint.
pub type EdgeTable<T> = [[T; 2]; 2];

/// Returns `table` as seen from the reversed orientation.
pub fn transpose<T: Copy>(table: &EdgeTable<T>) -> EdgeTable<T> {
    [[table[0][0], table[1][0]], [table[0][1], table[1][1]]]
}

/// Parameter vector over the overcomplete index set: one constant, two
/// entries per vertex and four per edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters<T> {
    pub const_term: T,
    pub node: Vec<[T; 2]>,
    pub edge: Vec<EdgeTable<T>>,
}

impl<T: Real> Parameters<T> {
    pub fn zeros(graph: &Graph) -> Self {
        Self::zeros_sized(graph.vertex_count(), graph.edge_count())
    }

    pub(crate) fn zeros_sized(n: usize, m: usize) -> Self {
        let z = T::zero();
        Self {
            const_term: z,
            node: vec![[z; 2]; n],
            edge: vec![[[z; 2]; 2]; m],
        }
    }

    pub fn matches(&self, graph: &Graph) -> bool {
        self.node.len() == graph.vertex_count() && self.edge.len() == graph.edge_count()
    }

    /// `θ_{st;jk}` for either orientation of the edge.
    pub fn lookup(&self, graph: &Graph, s: usize, t: usize, j: usize, k: usize) -> Result<T> {
        let e = graph.edge_index(s, t).ok_or(Error::UnknownEdge(s, t))?;
        Ok(if s < t {
            self.edge[e][j][k]
        } else {
            self.edge[e][k][j]
        })
    }

    /// Sets the table of edge `(s, t)` given in the `(s, t)` orientation.
    pub fn set_edge(
        &mut self,
        graph: &Graph,
        s: usize,
        t: usize,
        table: EdgeTable<T>,
    ) -> Result<()> {
        let e = graph.edge_index(s, t).ok_or(Error::UnknownEdge(s, t))?;
        self.edge[e] = if s < t { table } else { transpose(&table) };
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.const_term.is_finite()
            && self.node.iter().flatten().all(|v| v.is_finite())
            && self.edge.iter().flatten().flatten().all(|v| v.is_finite())
    }

    /// Energy of `labels` without dimension checks.
    pub(crate) fn energy_of(&self, graph: &Graph, labels: &[u8]) -> T {
        let mut total = self.const_term;
        for (s, th) in self.node.iter().enumerate() {
            total += th[labels[s] as usize];
        }
        for (e, &(s, t)) in graph.edges().iter().enumerate() {
            total += self.edge[e][labels[s] as usize][labels[t] as usize];
        }
        total
    }

    /// Elementwise `self + factor * other`.
    pub fn add_scaled(&mut self, other: &Self, factor: T) {
        self.const_term += factor * other.const_term;
        for (a, b) in self.node.iter_mut().zip(&other.node) {
            for j in 0..2 {
                a[j] += factor * b[j];
            }
        }
        for (a, b) in self.edge.iter_mut().zip(&other.edge) {
            for j in 0..2 {
                for k in 0..2 {
                    a[j][k] += factor * b[j][k];
                }
            }
        }
    }

    /// Inner product over the full overcomplete index set.
    pub fn dot(&self, other: &Self) -> T {
        let mut acc = self.const_term * other.const_term;
        for (a, b) in self.node.iter().zip(&other.node) {
            acc += a[0] * b[0] + a[1] * b[1];
        }
        for (a, b) in self.edge.iter().zip(&other.edge) {
            for j in 0..2 {
                for k in 0..2 {
                    acc += a[j][k] * b[j][k];
                }
            }
        }
        acc
    }
}

/// Binary labeling of all vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(pub Vec<u8>);

impl Assignment {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// Decodes `code` with vertex 0 as the most significant bit, so that
    /// increasing codes enumerate assignments in lexicographic order.
    pub fn from_code(code: u64, n: usize) -> Self {
        Self((0..n).map(|s| ((code >> (n - 1 - s)) & 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, s: usize) -> u8 {
        self.0[s]
    }
}

/// Graph plus parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyModel<T> {
    pub graph: Graph,
    pub params: Parameters<T>,
}

/// Outcome of [`EnergyModel::submodularity`].
#[derive(Clone, Debug, PartialEq)]
pub struct Submodularity<T> {
    pub submodular: bool,
    /// Violating edges with their (negative) slack `θ01 + θ10 − θ00 − θ11`.
    pub violations: Vec<(usize, T)>,
}

impl<T: Real> EnergyModel<T> {
    pub fn new(graph: Graph, params: Parameters<T>) -> Result<Self> {
        if !params.matches(&graph) {
            return Err(Error::InvalidGraph(format!(
                "parameters index {} vertices / {} edges, graph has {} / {}",
                params.node.len(),
                params.edge.len(),
                graph.vertex_count(),
                graph.edge_count()
            )));
        }
        if !params.is_finite() {
            return Err(Error::InvalidGraph("non-finite parameter".into()));
        }
        Ok(Self { graph, params })
    }

    pub fn zeros(graph: Graph) -> Self {
        let params = Parameters::zeros(&graph);
        Self { graph, params }
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn check_assignment(&self, x: &Assignment) -> Result<()> {
        if x.len() != self.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: self.vertex_count(),
                got: x.len(),
            });
        }
        if let Some((vertex, &label)) = x.0.iter().enumerate().find(|(_, &l)| l > 1) {
            return Err(Error::InvalidLabel { vertex, label });
        }
        Ok(())
    }

    /// `E(x; θ)`: constant plus node terms plus edge terms.
    pub fn evaluate(&self, x: &Assignment) -> Result<T> {
        self.check_assignment(x)?;
        Ok(self.params.energy_of(&self.graph, &x.0))
    }

    /// `θ01 + θ10 − θ00 − θ11` of edge `(s, t)`; unchanged by any
    /// reparameterization.
    pub fn edge_invariant(&self, s: usize, t: usize) -> Result<T> {
        let e = self
            .graph
            .edge_index(s, t)
            .ok_or(Error::UnknownEdge(s, t))?;
        Ok(table_invariant(&self.params.edge[e]))
    }

    pub fn edge_invariants(&self) -> Vec<T> {
        self.params.edge.iter().map(table_invariant).collect()
    }

    pub fn submodularity(&self) -> Submodularity<T> {
        let violations: Vec<(usize, T)> = self
            .params
            .edge
            .iter()
            .enumerate()
            .map(|(e, table)| (e, table_invariant(table)))
            .filter(|&(_, slack)| slack < T::zero())
            .collect();
        Submodularity {
            submodular: violations.is_empty(),
            violations,
        }
    }

    pub fn is_submodular(&self) -> bool {
        self.submodularity().submodular
    }

    /// Exhaustively checks `E(x; a) = E(x; b)` for every assignment.
    pub fn is_reparameterization_of(&self, other: &Self, limit: usize) -> Result<bool> {
        check_reparameterization(self, other, limit, T::lit(ENERGY_TOL))
    }
}

pub(crate) fn table_invariant<T: Real>(t: &EdgeTable<T>) -> T {
    t[0][1] + t[1][0] - t[0][0] - t[1][1]
}

/// True iff `a` and `b` agree (within `tol`) on all `2^n` assignments.
pub fn check_reparameterization<T: Real>(
    a: &EnergyModel<T>,
    b: &EnergyModel<T>,
    limit: usize,
    tol: T,
) -> Result<bool> {
    if a.graph != b.graph {
        return Err(Error::GraphMismatch);
    }
    let n = a.vertex_count();
    if n > limit || n >= 64 {
        return Err(Error::LimitExceeded { n, limit });
    }
    let mut labels = vec![0u8; n];
    for code in 0..(1u64 << n) {
        for (s, l) in labels.iter_mut().enumerate() {
            *l = ((code >> (n - 1 - s)) & 1) as u8;
        }
        let ea = a.params.energy_of(&a.graph, &labels);
        let eb = b.params.energy_of(&b.graph, &labels);
        if (ea - eb).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}
