//! Optimal local sets: admissible labels per vertex and label pairs per edge.

use std::fmt;

use crate::energy::Graph;

/// Subset of `{0, 1}` stored as a two-bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LabelSet(u8);

impl LabelSet {
    pub const EMPTY: Self = Self(0);
    pub const FULL: Self = Self(0b11);

    pub fn single(j: u8) -> Self {
        debug_assert!(j < 2);
        Self(1 << j)
    }

    pub fn contains(self, j: u8) -> bool {
        self.0 & (1 << j) != 0
    }

    pub fn insert(&mut self, j: u8) {
        self.0 |= 1 << j;
    }

    pub fn remove(&mut self, j: u8) {
        self.0 &= !(1 << j);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    /// The label if the set is a singleton.
    pub fn only(self) -> Option<u8> {
        match self.0 {
            0b01 => Some(0),
            0b10 => Some(1),
            _ => None,
        }
    }

    pub fn iter(self) -> impl Iterator<Item = u8> {
        (0..2u8).filter(move |&j| self.contains(j))
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Subset of `{0, 1}²` for an edge `(s, t)` with `s < t`; pair `(j, k)` means
/// `x_s = j, x_t = k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PairSet(u8);

impl PairSet {
    pub const EMPTY: Self = Self(0);
    pub const FULL: Self = Self(0b1111);

    fn bit(j: u8, k: u8) -> u8 {
        1 << (2 * j + k)
    }

    pub fn from_pairs(pairs: &[(u8, u8)]) -> Self {
        let mut s = Self::EMPTY;
        for &(j, k) in pairs {
            s.insert(j, k);
        }
        s
    }

    pub fn contains(self, j: u8, k: u8) -> bool {
        self.0 & Self::bit(j, k) != 0
    }

    pub fn insert(&mut self, j: u8, k: u8) {
        self.0 |= Self::bit(j, k);
    }

    pub fn remove(&mut self, j: u8, k: u8) {
        self.0 &= !Self::bit(j, k);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = (u8, u8)> {
        [(0, 0), (0, 1), (1, 0), (1, 1)]
            .into_iter()
            .filter(move |&(j, k)| self.contains(j, k))
    }

    /// Labels of the lower endpoint that occur in some pair.
    pub fn firsts(self) -> LabelSet {
        let mut out = LabelSet::EMPTY;
        for (j, _) in self.iter() {
            out.insert(j);
        }
        out
    }

    /// Labels of the upper endpoint that occur in some pair.
    pub fn seconds(self) -> LabelSet {
        let mut out = LabelSet::EMPTY;
        for (_, k) in self.iter() {
            out.insert(k);
        }
        out
    }

    /// Drops pairs whose endpoint labels fall outside the given sets.
    pub fn restrict(self, first: LabelSet, second: LabelSet) -> Self {
        let mut out = self;
        for (j, k) in self.iter() {
            if !first.contains(j) || !second.contains(k) {
                out.remove(j, k);
            }
        }
        out
    }
}

impl fmt::Debug for PairSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Per-vertex label sets and per-edge pair sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalSets {
    pub node: Vec<LabelSet>,
    pub edge: Vec<PairSet>,
}

/// A broken Lemma-1 style consistency condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inconsistency {
    EmptyNode(usize),
    EmptyEdge(usize),
    /// Edge pair uses a label missing from an endpoint set.
    UnsupportedPair {
        edge: usize,
        pair: (u8, u8),
    },
    /// Vertex label with no pair on the given incident edge.
    UnmatchedLabel {
        vertex: usize,
        label: u8,
        edge: usize,
    },
}

impl LocalSets {
    pub fn full(graph: &Graph) -> Self {
        Self {
            node: vec![LabelSet::FULL; graph.vertex_count()],
            edge: vec![PairSet::FULL; graph.edge_count()],
        }
    }

    pub fn all_nonempty(&self) -> bool {
        self.node.iter().all(|s| !s.is_empty()) && self.edge.iter().all(|s| !s.is_empty())
    }

    /// Checks non-emptiness and both directions of arc consistency.
    pub fn inconsistencies(&self, graph: &Graph) -> Vec<Inconsistency> {
        let mut out = Vec::new();
        for (s, set) in self.node.iter().enumerate() {
            if set.is_empty() {
                out.push(Inconsistency::EmptyNode(s));
            }
        }
        for (e, &(s, t)) in graph.edges().iter().enumerate() {
            let pairs = self.edge[e];
            if pairs.is_empty() {
                out.push(Inconsistency::EmptyEdge(e));
            }
            for (j, k) in pairs.iter() {
                if !self.node[s].contains(j) || !self.node[t].contains(k) {
                    out.push(Inconsistency::UnsupportedPair {
                        edge: e,
                        pair: (j, k),
                    });
                }
            }
            for j in self.node[s].iter() {
                if !pairs.firsts().contains(j) {
                    out.push(Inconsistency::UnmatchedLabel {
                        vertex: s,
                        label: j,
                        edge: e,
                    });
                }
            }
            for k in self.node[t].iter() {
                if !pairs.seconds().contains(k) {
                    out.push(Inconsistency::UnmatchedLabel {
                        vertex: t,
                        label: k,
                        edge: e,
                    });
                }
            }
        }
        out
    }

    pub fn is_consistent(&self, graph: &Graph) -> bool {
        self.inconsistencies(graph).is_empty()
    }
}
