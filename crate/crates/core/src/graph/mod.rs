//! Simple undirected graphs, signings and 2-lifts.
//!
//! Edges are stored canonically as `(min, max)` pairs sorted
//! lexicographically; every iteration order and tie-break in the crate
//! derives from this order. Part labels are 0-based in memory and 1-based
//! in the text format.

pub mod families;
mod io;

use std::collections::VecDeque;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::spectral::exact::IntMatrix;

pub use io::{parse_edge_list, parse_signing, write_edge_list, write_signing};

pub type Edge = (usize, usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({u}, {v}) joins two vertices of part {part}")]
    SamePart { u: usize, v: usize, part: usize },
    #[error("part mapping has {got} entries for {n} vertices")]
    PartsLength { got: usize, n: usize },
    #[error("part labels are not contiguous: label {0} is unused")]
    NonContiguousParts(usize),
    #[error("signing has {got} signs for {m} edges")]
    SigningLength { got: usize, m: usize },
    #[error("sign {0} is not +1 or -1")]
    InvalidSign(i64),
    #[error("dimension mismatch: graph has {parts} parts, matrix is {dim}x{dim}")]
    DimensionMismatch { parts: usize, dim: usize },
    #[error("block matrix must be symmetric with zero diagonal and nonnegative entries")]
    InvalidBlockMatrix,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A simple undirected graph with optional part labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    parts: Option<Vec<usize>>,
    num_parts: usize,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Validates and canonicalizes an edge list. Part labels are 0-based and
    /// must cover `0..k` without gaps.
    pub fn new(n: usize, edges: &[Edge], parts: Option<Vec<usize>>) -> Result<Self, GraphError> {
        let mut canon = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { u, v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        let num_parts = match &parts {
            Some(p) => {
                if p.len() != n {
                    return Err(GraphError::PartsLength { got: p.len(), n });
                }
                let k = p.iter().map(|&x| x + 1).max().unwrap_or(0);
                let mut used = vec![false; k];
                for &x in p {
                    used[x] = true;
                }
                if let Some(missing) = used.iter().position(|&u| !u) {
                    return Err(GraphError::NonContiguousParts(missing));
                }
                for &(u, v) in &canon {
                    if p[u] == p[v] {
                        return Err(GraphError::SamePart { u, v, part: p[u] });
                    }
                }
                k
            }
            None => 0,
        };
        Ok(Self::from_canonical(n, canon, parts, num_parts))
    }

    /// Builds from an already canonical, sorted, validated edge list.
    pub(crate) fn from_canonical(
        n: usize,
        edges: Vec<Edge>,
        parts: Option<Vec<usize>>,
        num_parts: usize,
    ) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph {
            n,
            edges,
            parts,
            num_parts,
            adj,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_canonical(n, Vec::new(), None, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn parts(&self) -> Option<&[usize]> {
        self.parts.as_deref()
    }

    pub fn num_parts(&self) -> usize {
        self.num_parts
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Position of edge `uv` in the canonical edge list.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    /// `Some(d)` iff every vertex has degree `d`. The empty vertex set is 0-regular.
    pub fn regularity(&self) -> Option<usize> {
        let d = self.adj.first().map_or(0, Vec::len);
        self.adj.iter().all(|l| l.len() == d).then_some(d)
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Same graph with part labels replaced (or dropped).
    pub fn with_parts(&self, parts: Option<Vec<usize>>) -> Result<Self, GraphError> {
        Graph::new(self.n, &self.edges, parts)
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    pub fn adjacency_int(&self) -> IntMatrix {
        let mut a = IntMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a.set(u, v, 1);
            a.set(v, u, 1);
        }
        a
    }

    /// Spanning subgraph on the same vertex set (parts kept) using the
    /// edges at the given canonical indices.
    pub fn spanning_subgraph(&self, edge_indices: &[usize]) -> Graph {
        let mut edges: Vec<Edge> = edge_indices.iter().map(|&i| self.edges[i]).collect();
        edges.sort_unstable();
        edges.dedup();
        Self::from_canonical(self.n, edges, self.parts.clone(), self.num_parts)
    }

    /// Spanning subgraph keeping exactly the edges for which `keep` holds.
    pub fn filter_edges(&self, mut keep: impl FnMut(usize, Edge) -> bool) -> Graph {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, &e)| keep(i, e))
            .map(|(_, &e)| e)
            .collect();
        Self::from_canonical(self.n, edges, self.parts.clone(), self.num_parts)
    }

    /// Two-sided coloring: part labels when there are exactly two parts,
    /// otherwise a breadth-first 2-coloring in which the smallest vertex of
    /// every component gets side `false`. `None` if not bipartite.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        if self.num_parts == 2 {
            return self.parts.as_ref().map(|p| p.iter().map(|&x| x == 1).collect());
        }
        let mut color: Vec<Option<bool>> = vec![None; self.n];
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if color[s].is_some() {
                continue;
            }
            color[s] = Some(false);
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                let cx = color[x].unwrap();
                for &y in &self.adj[x] {
                    match color[y] {
                        None => {
                            color[y] = Some(!cx);
                            queue.push_back(y);
                        }
                        Some(cy) if cy == cx => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(color.into_iter().map(|c| c.unwrap()).collect())
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let x = comp[i];
                i += 1;
                for &y in &self.adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// Subgraph induced on `V_i ⊔ V_j`, relabeled to `0..|V_i|+|V_j|` in
    /// increasing global order, with parts `0` (for `i`) and `1` (for `j`).
    pub fn part_pair(&self, i: usize, j: usize) -> PartPair {
        let parts = self.parts.as_deref().expect("part_pair needs part labels");
        let vertices: Vec<usize> = (0..self.n).filter(|&v| parts[v] == i || parts[v] == j).collect();
        let mut local = vec![usize::MAX; self.n];
        for (k, &v) in vertices.iter().enumerate() {
            local[v] = k;
        }
        let mut edges = Vec::new();
        let mut edge_ids = Vec::new();
        for (idx, &(u, v)) in self.edges.iter().enumerate() {
            let (pu, pv) = (parts[u], parts[v]);
            if (pu == i && pv == j) || (pu == j && pv == i) {
                edges.push((local[u], local[v]));
                edge_ids.push(idx);
            }
        }
        let local_parts = vertices.iter().map(|&v| usize::from(parts[v] == j)).collect();
        // local relabeling is monotone, so edges stay canonical and sorted
        let graph = Graph::from_canonical(vertices.len(), edges, Some(local_parts), 2);
        PartPair {
            graph,
            vertices,
            edge_ids,
        }
    }

    /// Disjoint union; vertex `v` of the `i`-th graph becomes `offset_i + v`.
    /// Parts are kept only if every input carries the same number of parts.
    pub fn disjoint_union(graphs: &[Graph]) -> Graph {
        let n = graphs.iter().map(Graph::n).sum();
        let k = graphs.first().map_or(0, Graph::num_parts);
        let keep_parts = k > 0 && graphs.iter().all(|g| g.num_parts == k && g.parts.is_some());
        let mut edges = Vec::new();
        let mut parts = Vec::new();
        let mut offset = 0;
        for g in graphs {
            edges.extend(g.edges.iter().map(|&(u, v)| (u + offset, v + offset)));
            if keep_parts {
                parts.extend_from_slice(g.parts.as_deref().unwrap());
            }
            offset += g.n;
        }
        if keep_parts {
            Graph::from_canonical(n, edges, Some(parts), k)
        } else {
            Graph::from_canonical(n, edges, None, 0)
        }
    }
}

/// The bipartite layer between two parts, relabeled locally.
#[derive(Debug, Clone)]
pub struct PartPair {
    pub graph: Graph,
    /// Local vertex index → global vertex.
    pub vertices: Vec<usize>,
    /// Local edge index → global canonical edge index.
    pub edge_ids: Vec<usize>,
}

/// An assignment of ±1 to every edge of a base graph, aligned with the
/// base's canonical edge order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signing {
    base: Graph,
    signs: Vec<i8>,
}

impl Signing {
    pub fn new(base: Graph, signs: Vec<i8>) -> Result<Self, GraphError> {
        if signs.len() != base.m() {
            return Err(GraphError::SigningLength {
                got: signs.len(),
                m: base.m(),
            });
        }
        if let Some(&s) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(GraphError::InvalidSign(s.into()));
        }
        Ok(Signing { base, signs })
    }

    pub fn all_positive(base: Graph) -> Self {
        let signs = vec![1; base.m()];
        Signing { base, signs }
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn sign_of(&self, u: usize, v: usize) -> Option<i8> {
        self.base.edge_index(u, v).map(|i| self.signs[i])
    }

    pub fn signed_adjacency(&self) -> DMatrix<f64> {
        signed_adjacency(&self.base, &self.signs)
    }

    pub fn signed_adjacency_int(&self) -> IntMatrix {
        let mut a = IntMatrix::zeros(self.base.n, self.base.n);
        for (&(u, v), &s) in self.base.edges.iter().zip(&self.signs) {
            a.set(u, v, s.into());
            a.set(v, u, s.into());
        }
        a
    }
}

pub(crate) fn signed_adjacency(g: &Graph, signs: &[i8]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(g.n, g.n);
    for (&(u, v), &s) in g.edges.iter().zip(signs) {
        a[(u, v)] = f64::from(s);
        a[(v, u)] = f64::from(s);
    }
    a
}

/// The 2-lift determined by a signing. Vertex `v_b` of the lift is
/// `v + b * n`; part labels are inherited.
pub fn two_lift(s: &Signing) -> Graph {
    let g = &s.base;
    let n = g.n;
    let mut edges = Vec::with_capacity(2 * g.m());
    for (&(u, v), &sign) in g.edges.iter().zip(&s.signs) {
        if sign == 1 {
            edges.push((u, v));
            edges.push((u + n, v + n));
        } else {
            edges.push((u, v + n));
            edges.push((v, u + n));
        }
    }
    for e in &mut edges {
        *e = (e.0.min(e.1), e.0.max(e.1));
    }
    edges.sort_unstable();
    let parts = g.parts.as_ref().map(|p| p.iter().chain(p.iter()).copied().collect());
    Graph::from_canonical(2 * n, edges, parts, g.num_parts)
}

/// True iff every bipartite layer `G[V_i ⊔ V_j]` is `M_ij`-regular.
pub fn check_graph_lift(g: &Graph, m: &IntMatrix) -> Result<bool, GraphError> {
    let k = m.rows();
    if m.cols() != k || g.parts.is_none() || g.num_parts != k {
        return Err(GraphError::DimensionMismatch {
            parts: g.num_parts,
            dim: k,
        });
    }
    for i in 0..k {
        if m.get(i, i) != 0 {
            return Err(GraphError::InvalidBlockMatrix);
        }
        for j in 0..k {
            if m.get(i, j) < 0 || m.get(i, j) != m.get(j, i) {
                return Err(GraphError::InvalidBlockMatrix);
            }
        }
    }
    let parts = g.parts.as_deref().unwrap();
    let mut counts = vec![0i64; k];
    for v in 0..g.n {
        counts.iter_mut().for_each(|c| *c = 0);
        for &w in &g.adj[v] {
            counts[parts[w]] += 1;
        }
        let pv = parts[v];
        if (0..k).any(|j| counts[j] != m.get(pv, j)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::families::*;
    use super::*;

    #[test]
    fn builds_small_cycle() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], None).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert_eq!(g.regularity(), Some(2));
    }

    #[test]
    fn builds_k33_with_parts() {
        let edges: Vec<Edge> = (0..3).flat_map(|i| (3..6).map(move |j| (i, j))).collect();
        let g = Graph::new(6, &edges, Some(vec![0, 0, 0, 1, 1, 1])).unwrap();
        assert_eq!(g.m(), 9);
        assert_eq!(g.regularity(), Some(3));
        assert_eq!(g.num_parts(), 2);
    }

    #[test]
    fn rejects_invalid_edges() {
        assert_eq!(
            Graph::new(2, &[(0, 1), (0, 1)], None),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(Graph::new(2, &[(1, 1)], None), Err(GraphError::SelfLoop(1)));
        assert!(matches!(
            Graph::new(2, &[(0, 2)], None),
            Err(GraphError::VertexOutOfRange { .. })
        ));
        assert_eq!(
            Graph::new(3, &[(0, 2)], Some(vec![0, 1, 0])),
            Err(GraphError::SamePart { u: 0, v: 2, part: 0 })
        );
        assert_eq!(
            Graph::new(2, &[], Some(vec![0, 2])),
            Err(GraphError::NonContiguousParts(1))
        );
    }

    #[test]
    fn regularity_cases() {
        assert_eq!(path(3).regularity(), None);
        assert_eq!(Graph::empty(5).regularity(), Some(0));
        assert_eq!(complete_bipartite(3, 3).regularity(), Some(3));
    }

    #[test]
    fn trivial_lift_is_two_copies() {
        let c4 = cycle(4);
        let lift = two_lift(&Signing::all_positive(c4.clone()));
        assert_eq!(lift.n(), 8);
        assert_eq!(lift.components().len(), 2);
        let copy = Graph::disjoint_union(&[c4.clone(), c4]);
        assert_eq!(lift.edges(), copy.edges());
    }

    #[test]
    fn one_negative_edge_lifts_c4_to_c8() {
        let c4 = cycle(4);
        let mut signs = vec![1; 4];
        signs[0] = -1;
        let lift = two_lift(&Signing::new(c4, signs).unwrap());
        assert_eq!(lift.m(), 8);
        assert_eq!(lift.regularity(), Some(2));
        assert!(lift.is_connected());
    }

    #[test]
    fn negative_k2_lifts_to_two_disjoint_edges() {
        let k2 = Graph::new(2, &[(0, 1)], None).unwrap();
        let lift = two_lift(&Signing::new(k2, vec![-1]).unwrap());
        assert_eq!(lift.edges(), &[(0, 3), (1, 2)]);
    }

    #[test]
    fn lift_keeps_parts() {
        let k = complete_bipartite(2, 3);
        let lift = two_lift(&Signing::new(k.clone(), vec![1, -1, 1, -1, 1, -1]).unwrap());
        let p = lift.parts().unwrap();
        assert_eq!(&p[..5], k.parts().unwrap());
        assert_eq!(&p[5..], k.parts().unwrap());
        for &(u, v) in lift.edges() {
            assert_ne!(p[u], p[v]);
        }
    }

    #[test]
    fn graph_lift_check() {
        let kdd = complete_bipartite(4, 4);
        let m = IntMatrix::from_rows(&[vec![0, 4], vec![4, 0]]);
        assert!(check_graph_lift(&kdd, &m).unwrap());
        let k33 = complete_bipartite(3, 3);
        let m2 = IntMatrix::from_rows(&[vec![0, 2], vec![2, 0]]);
        assert!(!check_graph_lift(&k33, &m2).unwrap());
        let m3 = IntMatrix::from_rows(&[vec![0, 3, 0], vec![3, 0, 0], vec![0, 0, 0]]);
        assert!(matches!(
            check_graph_lift(&k33, &m3),
            Err(GraphError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn part_pair_relabels_monotonically() {
        let g = Graph::new(6, &[(0, 2), (0, 4), (1, 3), (2, 5), (3, 4)], Some(vec![0, 0, 1, 1, 2, 2]))
            .unwrap();
        let pp = g.part_pair(0, 2);
        assert_eq!(pp.vertices, vec![0, 1, 4, 5]);
        assert_eq!(pp.graph.edges(), &[(0, 2)]);
        assert_eq!(pp.edge_ids, vec![1]);
    }

    #[test]
    fn bipartition_from_bfs() {
        let side = cycle(6).bipartition().unwrap();
        assert_eq!(side, vec![false, true, false, true, false, true]);
        assert!(cycle(5).bipartition().is_none());
    }
}
