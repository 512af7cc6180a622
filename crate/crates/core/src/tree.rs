//! Exact min-sum computations on a single tree.

use crate::decomposition::Tree;
use crate::energy::{Assignment, EdgeTable, Graph, Parameters};
use crate::error::{Error, Result};
use crate::local_sets::{LabelSet, LocalSets, PairSet};
use crate::scalar::Real;

/// Default gap below which a label counts as optimal.
pub const OPTIMAL_SET_EPS: f64 = 1e-8;
/// Residual allowed when a vector is asserted to be in canonical normal form.
pub const CANONICAL_TOL: f64 = 1e-9;

/// Min-marginals of an energy over all of `{0,1}^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinMarginals<T> {
    pub node: Vec<[T; 2]>,
    pub edge: Vec<EdgeTable<T>>,
    pub optimum: T,
}

#[inline]
fn pair<T: Copy>(table: &EdgeTable<T>, child_first: bool, child: usize, parent: usize) -> T {
    if child_first {
        table[child][parent]
    } else {
        table[parent][child]
    }
}

#[inline]
fn pair_mut<T>(table: &mut EdgeTable<T>, child_first: bool, child: usize, parent: usize) -> &mut T {
    if child_first {
        &mut table[child][parent]
    } else {
        &mut table[parent][child]
    }
}

fn check_supported<T: Real>(tree: &Tree, p: &Parameters<T>) -> Result<()> {
    let mut in_tree = vec![false; p.node.len()];
    for v in tree.vertices() {
        if v >= p.node.len() {
            return Err(Error::NotTreeSupported(format!(
                "vertex {v} outside parameter vector"
            )));
        }
        in_tree[v] = true;
    }
    for (v, th) in p.node.iter().enumerate() {
        if !in_tree[v] && (th[0] != T::zero() || th[1] != T::zero()) {
            return Err(Error::NotTreeSupported(format!("vertex {v}")));
        }
    }
    for (e, tab) in p.edge.iter().enumerate() {
        if !tree.contains_edge(e) && tab.iter().flatten().any(|&v| v != T::zero()) {
            return Err(Error::NotTreeSupported(format!("edge {e}")));
        }
    }
    if let Some(&e) = tree.edges().iter().find(|&&e| e >= p.edge.len()) {
        return Err(Error::NotTreeSupported(format!(
            "edge {e} outside parameter vector"
        )));
    }
    Ok(())
}

/// Reparameterizes `p` in place into canonical normal form on `tree`:
/// an inward then outward min-sum sweep, then constants moved into
/// `const_term` so every node minimum and every edge min-marginal offset is 0.
pub(crate) fn canonicalize_in_place<T: Real>(tree: &Tree, p: &mut Parameters<T>) {
    let nodes = tree.nodes();
    for i in (1..nodes.len()).rev() {
        let c = nodes[i].vertex;
        let (pi, e) = nodes[i].parent.expect("non-root has a parent");
        let q = nodes[pi].vertex;
        let cf = c < q;
        let mut msg = [T::zero(); 2];
        for (jq, m) in msg.iter_mut().enumerate() {
            *m = (p.node[c][0] + pair(&p.edge[e], cf, 0, jq))
                .min2(p.node[c][1] + pair(&p.edge[e], cf, 1, jq));
        }
        for kc in 0..2 {
            for jq in 0..2 {
                *pair_mut(&mut p.edge[e], cf, kc, jq) -= msg[jq];
            }
        }
        for jq in 0..2 {
            p.node[q][jq] += msg[jq];
        }
    }
    for node in &nodes[1..] {
        let c = node.vertex;
        let (pi, e) = node.parent.unwrap();
        let q = nodes[pi].vertex;
        let cf = c < q;
        let mut msg = [T::zero(); 2];
        for (kc, m) in msg.iter_mut().enumerate() {
            *m = (p.node[q][0] + pair(&p.edge[e], cf, kc, 0))
                .min2(p.node[q][1] + pair(&p.edge[e], cf, kc, 1));
        }
        for kc in 0..2 {
            for jq in 0..2 {
                *pair_mut(&mut p.edge[e], cf, kc, jq) -= msg[kc];
            }
            p.node[c][kc] += msg[kc];
        }
    }
    for v in tree.vertices() {
        let d = p.node[v][0].min2(p.node[v][1]);
        p.node[v][0] -= d;
        p.node[v][1] -= d;
        p.const_term += d;
    }
    for node in &nodes[1..] {
        let c = node.vertex;
        let (pi, e) = node.parent.unwrap();
        let q = nodes[pi].vertex;
        let (s, t) = (c.min(q), c.max(q));
        let mut d = T::infinity();
        for j in 0..2 {
            for k in 0..2 {
                d = d.min2(p.node[s][j] + p.edge[e][j][k] + p.node[t][k]);
            }
        }
        for row in p.edge[e].iter_mut() {
            for v in row.iter_mut() {
                *v -= d;
            }
        }
        p.const_term += d;
    }
}

/// Largest violation of the normal-form (both edge directions, zero
/// constant) and canonical conditions on the tree's vertices and edges.
pub fn canonical_residual<T: Real>(tree: &Tree, p: &Parameters<T>) -> T {
    let mut worst = T::zero();
    for v in tree.vertices() {
        worst = worst.max(p.node[v][0].min2(p.node[v][1]).abs());
    }
    let nodes = tree.nodes();
    for node in &nodes[1..] {
        let (pi, e) = node.parent.unwrap();
        let a = node.vertex;
        let b = nodes[pi].vertex;
        let (s, t) = (a.min(b), a.max(b));
        let tab = &p.edge[e];
        let mut both = T::infinity();
        for j in 0..2 {
            for k in 0..2 {
                both = both.min2(p.node[s][j] + tab[j][k] + p.node[t][k]);
            }
        }
        worst = worst.max(both.abs());
        for k in 0..2 {
            let from_s = (p.node[s][0] + tab[0][k]).min2(p.node[s][1] + tab[1][k]);
            let from_t = (p.node[t][0] + tab[k][0]).min2(p.node[t][1] + tab[k][1]);
            worst = worst.max(from_s.abs()).max(from_t.abs());
        }
    }
    worst
}

/// Canonical normal form of a tree-supported parameter vector.
pub fn to_canonical_normal_form<T: Real>(tree: &Tree, p: &Parameters<T>) -> Result<Parameters<T>> {
    check_supported(tree, p)?;
    let mut q = p.clone();
    canonicalize_in_place(tree, &mut q);
    Ok(q)
}

/// `Φ(θ) = θ_const` for a vector already in canonical normal form.
pub fn tree_min_value<T: Real>(tree: &Tree, p_canonical: &Parameters<T>) -> Result<T> {
    let r = canonical_residual(tree, p_canonical);
    if !(r <= T::lit(CANONICAL_TOL)) {
        return Err(Error::NotCanonical(r.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(p_canonical.const_term)
}

/// Minimum over the tree of `Σ node(v)[x_v] + Σ edge(e)[x_s][x_t]`, with any
/// label forbidden where `allowed` says so. Constant terms are not included.
pub(crate) fn tree_min_energy<T: Real>(
    tree: &Tree,
    node: impl Fn(usize) -> [T; 2],
    edge: impl Fn(usize) -> EdgeTable<T>,
    allowed: impl Fn(usize, usize) -> bool,
) -> T {
    let nodes = tree.nodes();
    let mut acc: Vec<[T; 2]> = nodes
        .iter()
        .map(|n| {
            let th = node(n.vertex);
            let mut out = th;
            for j in 0..2 {
                if !allowed(n.vertex, j) {
                    out[j] = T::infinity();
                }
            }
            out
        })
        .collect();
    for i in (1..nodes.len()).rev() {
        let c = nodes[i].vertex;
        let (pi, e) = nodes[i].parent.unwrap();
        let cf = c < nodes[pi].vertex;
        let tab = edge(e);
        for jq in 0..2 {
            let m = (acc[i][0] + pair(&tab, cf, 0, jq)).min2(acc[i][1] + pair(&tab, cf, 1, jq));
            acc[pi][jq] += m;
        }
    }
    acc[0][0].min2(acc[0][1])
}

/// Node tables for every vertex and edge tables for the tree's own edges;
/// other edge tables are left at the optimum.
pub(crate) fn marginals_on_tree<T: Real>(tree: &Tree, p: &Parameters<T>) -> MinMarginals<T> {
    let mut q = p.clone();
    canonicalize_in_place(tree, &mut q);
    let phi = q.const_term;
    let node: Vec<[T; 2]> = q.node.iter().map(|th| [phi + th[0], phi + th[1]]).collect();
    let mut edge = vec![[[phi; 2]; 2]; p.edge.len()];
    let nodes = tree.nodes();
    for n in &nodes[1..] {
        let (pi, e) = n.parent.unwrap();
        let (a, b) = (n.vertex, nodes[pi].vertex);
        let (s, t) = (a.min(b), a.max(b));
        for j in 0..2 {
            for k in 0..2 {
                edge[e][j][k] = phi + q.node[s][j] + q.edge[e][j][k] + q.node[t][k];
            }
        }
    }
    MinMarginals {
        node,
        edge,
        optimum: phi,
    }
}

/// Min-marginals of a tree-supported vector over all of `{0,1}^n`.
///
/// Vertices outside the tree are unconstrained, so their rows equal the
/// optimum. Non-tree edges between two tree vertices are computed by
/// clamping both endpoints.
pub fn tree_min_marginals<T: Real>(
    graph: &Graph,
    tree: &Tree,
    p: &Parameters<T>,
) -> Result<MinMarginals<T>> {
    if !p.matches(graph) {
        return Err(Error::GraphMismatch);
    }
    check_supported(tree, p)?;
    let mut mm = marginals_on_tree(tree, p);
    let mut in_tree = vec![false; p.node.len()];
    for v in tree.vertices() {
        in_tree[v] = true;
    }
    for (e, &(s, t)) in graph.edges().iter().enumerate() {
        if tree.contains_edge(e) {
            continue;
        }
        for j in 0..2 {
            for k in 0..2 {
                mm.edge[e][j][k] = if in_tree[s] && in_tree[t] {
                    p.const_term
                        + tree_min_energy(
                            tree,
                            |v| p.node[v],
                            |f| p.edge[f],
                            |v, l| (v != s || l == j) && (v != t || l == k),
                        )
                } else if in_tree[s] {
                    mm.node[s][j]
                } else if in_tree[t] {
                    mm.node[t][k]
                } else {
                    mm.optimum
                };
            }
        }
    }
    Ok(mm)
}

/// Labels and label pairs whose min-marginal is within `eps` of the optimum.
/// Entries outside the tree are left full.
pub fn tree_optimal_local_sets<T: Real>(
    tree: &Tree,
    p: &Parameters<T>,
    eps: T,
) -> Result<LocalSets> {
    check_supported(tree, p)?;
    Ok(local_sets_from_marginals(
        tree,
        &marginals_on_tree(tree, p),
        eps,
    ))
}

pub(crate) fn local_sets_from_marginals<T: Real>(
    tree: &Tree,
    mm: &MinMarginals<T>,
    eps: T,
) -> LocalSets {
    let mut node = vec![LabelSet::FULL; mm.node.len()];
    let mut edge = vec![PairSet::FULL; mm.edge.len()];
    for v in tree.vertices() {
        let mut set = LabelSet::EMPTY;
        for j in 0..2u8 {
            if mm.node[v][j as usize] - mm.optimum <= eps {
                set.insert(j);
            }
        }
        node[v] = set;
    }
    for &e in tree.edges() {
        let mut set = PairSet::EMPTY;
        for j in 0..2u8 {
            for k in 0..2u8 {
                if mm.edge[e][j as usize][k as usize] - mm.optimum <= eps {
                    set.insert(j, k);
                }
            }
        }
        edge[e] = set;
    }
    LocalSets { node, edge }
}

/// A minimizing assignment over the tree; ties and vertices outside the tree
/// get label 0.
pub fn decode_tree_optimum<T: Real>(tree: &Tree, p: &Parameters<T>) -> Result<Assignment> {
    check_supported(tree, p)?;
    let mut q = p.clone();
    canonicalize_in_place(tree, &mut q);
    Ok(decode_canonical(tree, &q))
}

pub(crate) fn decode_canonical<T: Real>(tree: &Tree, q: &Parameters<T>) -> Assignment {
    let nodes = tree.nodes();
    let mut x = vec![0u8; q.node.len()];
    let root = nodes[0].vertex;
    x[root] = u8::from(q.node[root][1] < q.node[root][0]);
    for node in &nodes[1..] {
        let c = node.vertex;
        let (pi, e) = node.parent.unwrap();
        let qv = nodes[pi].vertex;
        let cf = c < qv;
        let jq = x[qv] as usize;
        let zero = q.node[c][0] + pair(&q.edge[e], cf, 0, jq);
        let one = q.node[c][1] + pair(&q.edge[e], cf, 1, jq);
        x[c] = u8::from(one < zero);
    }
    Assignment(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{EnergyModel, Graph};

    fn random_tree_model(n: usize, seed: u64) -> (EnergyModel<f64>, Tree) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<(usize, usize)> = (1..n).map(|t| (rng.random_range(0..t), t)).collect();
        let g = Graph::new(n, edges).unwrap();
        let mut m = EnergyModel::zeros(g);
        m.params.const_term = rng.random_range(-1.0..1.0);
        for th in &mut m.params.node {
            *th = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        }
        for tab in &mut m.params.edge {
            *tab = [
                [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
                [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
            ];
        }
        let all: Vec<usize> = (0..m.graph.edge_count()).collect();
        let tree = Tree::from_edges(&m.graph, &all, Some(0)).unwrap();
        (m, tree)
    }

    /// Exhaustive min-marginals, independent of the sweep code.
    fn brute(m: &EnergyModel<f64>) -> MinMarginals<f64> {
        let n = m.vertex_count();
        let mut node = vec![[f64::INFINITY; 2]; n];
        let mut edge = vec![[[f64::INFINITY; 2]; 2]; m.graph.edge_count()];
        let mut best = f64::INFINITY;
        for code in 0..(1u64 << n) {
            let x = Assignment::from_code(code, n);
            let en = m.evaluate(&x).unwrap();
            best = best.min(en);
            for s in 0..n {
                let v = &mut node[s][x.get(s) as usize];
                *v = v.min(en);
            }
            for (e, &(s, t)) in m.graph.edges().iter().enumerate() {
                let v = &mut edge[e][x.get(s) as usize][x.get(t) as usize];
                *v = v.min(en);
            }
        }
        MinMarginals {
            node,
            edge,
            optimum: best,
        }
    }

    fn pair_model() -> (EnergyModel<f64>, Tree) {
        let g = Graph::path(2).unwrap();
        let mut m = EnergyModel::zeros(g);
        m.params.node[0] = [0.0, 10.0];
        let tree = Tree::from_edges(&m.graph, &[0], None).unwrap();
        (m, tree)
    }

    #[test]
    fn zero_input_is_canonical() {
        let g = Graph::path(4).unwrap();
        let p = Parameters::<f64>::zeros(&g);
        let tree = Tree::from_edges(&g, &[0, 1, 2], None).unwrap();
        let q = to_canonical_normal_form(&tree, &p).unwrap();
        assert_eq!(q, p);
        assert_eq!(tree_min_value(&tree, &q).unwrap(), 0.0);
        let mm = tree_min_marginals(&g, &tree, &p).unwrap();
        assert!(mm.node.iter().flatten().all(|&v| v == 0.0));
        assert!(mm.edge.iter().flatten().flatten().all(|&v| v == 0.0));
        let sets = tree_optimal_local_sets(&tree, &p, 1e-9).unwrap();
        assert_eq!(sets, LocalSets::full(&g));
        assert_eq!(
            decode_tree_optimum(&tree, &p).unwrap(),
            Assignment::zeros(4)
        );
    }

    #[test]
    fn single_node_canonical_form() {
        let g = Graph::new(1, []).unwrap();
        let mut p = Parameters::<f64>::zeros(&g);
        p.node[0] = [2.0, 5.0];
        let tree = Tree::singleton(&g, 0).unwrap();
        let q = to_canonical_normal_form(&tree, &p).unwrap();
        assert_eq!(q.const_term, 2.0);
        assert_eq!(q.node[0], [0.0, 3.0]);
        assert_eq!(tree_min_value(&tree, &q).unwrap(), 2.0);
    }

    #[test]
    fn min_value_requires_canonical_input() {
        let g = Graph::new(1, []).unwrap();
        let mut p = Parameters::<f64>::zeros(&g);
        p.node[0] = [2.0, 5.0];
        let tree = Tree::singleton(&g, 0).unwrap();
        assert!(matches!(
            tree_min_value(&tree, &p),
            Err(Error::NotCanonical(_))
        ));
    }

    #[test]
    fn decoupled_pair_marginals_sets_and_decoding() {
        let (m, tree) = pair_model();
        let mm = tree_min_marginals(&m.graph, &tree, &m.params).unwrap();
        assert_eq!(mm.optimum, 0.0);
        assert_eq!(mm.node[0], [0.0, 10.0]);
        assert_eq!(mm.node[1], [0.0, 0.0]);
        assert_eq!(mm.edge[0], [[0.0, 0.0], [10.0, 10.0]]);

        let sets = tree_optimal_local_sets(&tree, &m.params, 1e-9).unwrap();
        assert_eq!(sets.node[0], LabelSet::single(0));
        assert_eq!(sets.node[1], LabelSet::FULL);
        assert_eq!(sets.edge[0], PairSet::from_pairs(&[(0, 0), (0, 1)]));

        assert_eq!(decode_tree_optimum(&tree, &m.params).unwrap().get(0), 0);
    }

    #[test]
    fn rejects_parameters_outside_tree() {
        let g = Graph::path(3).unwrap();
        let mut p = Parameters::<f64>::zeros(&g);
        p.edge[1][0][1] = 1.0;
        let tree = Tree::from_edges(&g, &[0], None).unwrap();
        assert!(matches!(
            to_canonical_normal_form(&tree, &p),
            Err(Error::NotTreeSupported(_))
        ));
        p.edge[1][0][1] = 0.0;
        p.node[2][0] = 1.0;
        assert!(tree_min_marginals(&g, &tree, &p).is_err());
    }

    #[test]
    fn random_seven_node_trees_match_brute_force() {
        for seed in 0..30 {
            let (m, tree) = random_tree_model(7, seed);
            let q = to_canonical_normal_form(&tree, &m.params).unwrap();
            let qm = EnergyModel::new(m.graph.clone(), q.clone()).unwrap();
            assert!(qm.is_reparameterization_of(&m, 12).unwrap());
            assert!(canonical_residual(&tree, &q) <= 1e-9);

            let oracle = brute(&m);
            assert!((tree_min_value(&tree, &q).unwrap() - oracle.optimum).abs() <= 1e-9);
            let mm = tree_min_marginals(&m.graph, &tree, &m.params).unwrap();
            for (a, b) in mm.node.iter().flatten().zip(oracle.node.iter().flatten()) {
                assert!((a - b).abs() <= 1e-9);
            }
            for (a, b) in mm
                .edge
                .iter()
                .flatten()
                .flatten()
                .zip(oracle.edge.iter().flatten().flatten())
            {
                assert!((a - b).abs() <= 1e-9);
            }
            let x = decode_tree_optimum(&tree, &m.params).unwrap();
            assert!((m.evaluate(&x).unwrap() - oracle.optimum).abs() <= 1e-9);
        }
    }

    #[test]
    fn non_tree_edges_get_exact_tables_with_graph() {
        // tree is the path 0-1-2 inside a triangle
        let g = Graph::complete(3).unwrap();
        let mut p = Parameters::<f64>::zeros(&g);
        p.node = vec![[0.0, 1.0], [0.5, 0.0], [0.0, 0.25]];
        let e01 = g.edge_index(0, 1).unwrap();
        let e12 = g.edge_index(1, 2).unwrap();
        p.edge[e01] = [[0.0, 2.0], [2.0, 0.0]];
        p.edge[e12] = [[0.0, 0.3], [0.3, 0.0]];
        let tree = Tree::from_edges(&g, &[e01, e12], None).unwrap();
        let mm = tree_min_marginals(&g, &tree, &p).unwrap();
        let m = EnergyModel::new(g.clone(), p).unwrap();
        let oracle = brute(&m);
        for (a, b) in mm
            .edge
            .iter()
            .flatten()
            .flatten()
            .zip(oracle.edge.iter().flatten().flatten())
        {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn local_sets_are_consistent_and_lemma_c_holds(seed in 0u64..100_000, n in 2usize..10) {
            let (m, tree) = random_tree_model(n, seed);
            let eps = 1e-8;
            let sets = tree_optimal_local_sets(&tree, &m.params, eps).unwrap();
            prop_assert!(sets.is_consistent(&m.graph), "{:?}", sets.inconsistencies(&m.graph));
            let q = to_canonical_normal_form(&tree, &m.params).unwrap();
            for s in 0..n {
                for j in sets.node[s].iter() {
                    prop_assert!(q.node[s][j as usize] <= eps);
                }
            }
            for (e, &(s, t)) in m.graph.edges().iter().enumerate() {
                for (j, k) in sets.edge[e].iter() {
                    let v = q.node[s][j as usize] + q.edge[e][j as usize][k as usize] + q.node[t][k as usize];
                    prop_assert!(v <= 3.0 * eps);
                }
            }
        }

        #[test]
        fn every_optimal_pair_is_realizable(seed in 0u64..100_000, n in 2usize..9) {
            let (m, tree) = random_tree_model(n, seed);
            let eps = 1e-8;
            let sets = tree_optimal_local_sets(&tree, &m.params, eps).unwrap();
            let oracle = brute(&m);
            for (e, &(s, t)) in m.graph.edges().iter().enumerate() {
                for (j, k) in sets.edge[e].iter() {
                    let clamp = |v: usize, l: usize| (v != s || l == j as usize) && (v != t || l == k as usize);
                    let best = m.params.const_term
                        + tree_min_energy(&tree, |v| m.params.node[v], |f| m.params.edge[f], clamp);
                    prop_assert!(best <= oracle.optimum + n as f64 * eps);
                }
            }
        }
    }
}
