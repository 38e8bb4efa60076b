//! Short-cycle partitions and cycle decompositions of even graphs.

use std::collections::VecDeque;

use super::FactorError;
use crate::graph::Graph;

/// A closed walk without repeated vertices. `edges[i]` joins `vertices[i]`
/// and `vertices[(i + 1) % len]`; both are canonical indices into the base graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edges at even (`class = 0`) or odd (`class = 1`) positions.
    pub fn alternating_class(&self, class: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().skip(class).step_by(2).copied()
    }

    /// The alternating class holding the smallest edge index.
    pub fn class_of_min_edge(&self) -> usize {
        let pos = (0..self.edges.len()).min_by_key(|&i| self.edges[i]).unwrap_or(0);
        pos % 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclePartition {
    /// Edge-disjoint cycles of length at most `threshold`, in extraction order.
    pub short_cycles: Vec<Cycle>,
    /// Remaining edge indices, sorted. Their graph has girth above `threshold`.
    pub residual: Vec<usize>,
    pub threshold: usize,
}

/// `max(3, 2⌈log₂ n⌉)`.
pub fn default_threshold(n: usize) -> usize {
    (2 * ceil_log2(n)).max(3)
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Adjacency with edge ids and a liveness mask.
struct LiveGraph {
    adj: Vec<Vec<(usize, usize)>>,
    alive: Vec<bool>,
}

impl LiveGraph {
    fn new(g: &Graph, edge_ids: impl Iterator<Item = usize>) -> Self {
        let mut adj = vec![Vec::new(); g.n()];
        let mut alive = vec![false; g.m()];
        for id in edge_ids {
            let (u, v) = g.edges()[id];
            adj[u].push((v, id));
            adj[v].push((u, id));
            alive[id] = true;
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        LiveGraph { adj, alive }
    }

    fn remove(&mut self, id: usize) {
        self.alive[id] = false;
    }
}

/// Breadth-first scratch space reused across searches.
struct Bfs {
    dist: Vec<usize>,
    parent: Vec<(usize, usize)>,
    touched: Vec<usize>,
    queue: VecDeque<usize>,
}

const UNSEEN: usize = usize::MAX;

impl Bfs {
    fn new(n: usize) -> Self {
        Bfs {
            dist: vec![UNSEEN; n],
            parent: vec![(UNSEEN, UNSEEN); n],
            touched: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v] = UNSEEN;
            self.parent[v] = (UNSEEN, UNSEEN);
        }
        self.touched.clear();
        self.queue.clear();
    }

    /// Length of the shortest closed walk through `root` found by a search
    /// of depth `limit`, with the closing edge `(x, y, id)`. The value is a
    /// lower bound on the shortest cycle through `root`, and equals it when
    /// the live graph has no shorter cycle anywhere.
    fn shortest_closure(&mut self, g: &LiveGraph, root: usize, limit: usize) -> Option<(usize, usize, usize, usize)> {
        self.reset();
        self.dist[root] = 0;
        self.touched.push(root);
        self.queue.push_back(root);
        let mut best: Option<(usize, usize, usize, usize)> = None;
        while let Some(x) = self.queue.pop_front() {
            let dx = self.dist[x];
            if best.is_some_and(|b| 2 * dx >= b.0) {
                break;
            }
            for &(y, id) in &g.adj[x] {
                if !g.alive[id] || self.parent[x].1 == id {
                    continue;
                }
                if self.dist[y] == UNSEEN {
                    if dx < limit {
                        self.dist[y] = dx + 1;
                        self.parent[y] = (x, id);
                        self.touched.push(y);
                        self.queue.push_back(y);
                    }
                } else {
                    let len = dx + self.dist[y] + 1;
                    if best.is_none_or(|b| len < b.0) {
                        best = Some((len, x, y, id));
                    }
                }
            }
        }
        best
    }

    /// Cycle closed by edge `id = xy`, read off the search tree.
    fn cycle(&self, root: usize, x: usize, y: usize, id: usize) -> Cycle {
        let mut down = vec![x];
        let mut down_edges = Vec::new();
        let mut cur = x;
        while cur != root {
            let (p, e) = self.parent[cur];
            down_edges.push(e);
            down.push(p);
            cur = p;
        }
        down.reverse();
        down_edges.reverse();
        let mut vertices = down;
        let mut edges = down_edges;
        edges.push(id);
        let mut cur = y;
        while cur != root {
            let (p, e) = self.parent[cur];
            vertices.push(cur);
            edges.push(e);
            cur = p;
        }
        Cycle { vertices, edges }
    }
}

/// Greedy shortest-first removal of cycles of length at most `threshold`.
///
/// Works one length at a time: at length `g` the live graph has girth at
/// least `g`, so any closed walk of length `g` found from a vertex is a
/// shortest cycle. Vertices are visited in increasing order, and a vertex
/// is searched again only once `g` reaches its last lower bound.
pub fn cycle_partition(g: &Graph, threshold: usize) -> CyclePartition {
    cycle_partition_of(g, 0..g.m(), threshold)
}

pub(crate) fn cycle_partition_of(g: &Graph, edge_ids: impl Iterator<Item = usize>, threshold: usize) -> CyclePartition {
    let n = g.n();
    let mut live = LiveGraph::new(g, edge_ids);
    let mut bfs = Bfs::new(n);
    let mut bound = vec![3usize; n];
    let mut short_cycles = Vec::new();
    let limit = threshold / 2;
    for len in 3..=threshold {
        for v in 0..n {
            while bound[v] <= len {
                match bfs.shortest_closure(&live, v, limit) {
                    Some((l, x, y, id)) if l == len => {
                        let c = bfs.cycle(v, x, y, id);
                        for &e in &c.edges {
                            live.remove(e);
                        }
                        short_cycles.push(c);
                    }
                    Some((l, ..)) => bound[v] = l,
                    None => bound[v] = threshold + 1,
                }
            }
        }
    }
    let residual = (0..g.m()).filter(|&e| live.alive[e]).collect();
    CyclePartition {
        short_cycles,
        residual,
        threshold,
    }
}

/// Splits a graph with all degrees even into edge-disjoint cycles by walking
/// along smallest unused edges and cutting off a cycle whenever the walk
/// revisits a vertex.
pub fn decompose_even_into_cycles(g: &Graph) -> Result<Vec<Cycle>, FactorError> {
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) % 2 == 1) {
        return Err(FactorError::OddDegreeVertex(v));
    }
    Ok(decompose_even_of(g, 0..g.m()))
}

pub(crate) fn decompose_even_of(g: &Graph, edge_ids: impl Iterator<Item = usize>) -> Vec<Cycle> {
    let live = LiveGraph::new(g, edge_ids);
    let LiveGraph { adj, mut alive } = live;
    let mut cursor = vec![0usize; g.n()];
    let mut on_walk = vec![usize::MAX; g.n()];
    let mut cycles = Vec::new();
    let next_unused = |v: usize, alive: &[bool], cursor: &mut [usize]| -> Option<(usize, usize)> {
        while cursor[v] < adj[v].len() {
            let (w, id) = adj[v][cursor[v]];
            if alive[id] {
                return Some((w, id));
            }
            cursor[v] += 1;
        }
        None
    };
    for start in 0..g.n() {
        loop {
            if next_unused(start, &alive, &mut cursor).is_none() {
                break;
            }
            let mut walk = vec![start];
            let mut walk_edges: Vec<usize> = Vec::new();
            on_walk[start] = 0;
            loop {
                let x = *walk.last().unwrap();
                // every vertex has even live degree, so a walk that entered x can leave
                let (y, id) = next_unused(x, &alive, &mut cursor).expect("even degrees");
                alive[id] = false;
                walk_edges.push(id);
                if on_walk[y] == usize::MAX {
                    on_walk[y] = walk.len();
                    walk.push(y);
                    continue;
                }
                let at = on_walk[y];
                let vertices: Vec<usize> = walk.drain(at..).collect();
                let edges: Vec<usize> = walk_edges.drain(at..).collect();
                for &u in &vertices {
                    on_walk[u] = usize::MAX;
                }
                cycles.push(Cycle { vertices, edges });
                if walk.is_empty() && next_unused(y, &alive, &mut cursor).is_none() {
                    break;
                }
                on_walk[y] = walk.len();
                walk.push(y);
            }
        }
    }
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::{complete, complete_bipartite, cycle};

    fn is_forest(g: &Graph, edges: &[usize]) -> bool {
        let sub = g.spanning_subgraph(edges);
        sub.m() + sub.components().len() == sub.n()
    }

    fn check_cycle(g: &Graph, c: &Cycle) {
        let k = c.len();
        assert_eq!(c.vertices.len(), k);
        let mut vs = c.vertices.clone();
        vs.sort_unstable();
        vs.dedup();
        assert_eq!(vs.len(), k, "repeated vertex in {c:?}");
        for i in 0..k {
            let (a, b) = (c.vertices[i], c.vertices[(i + 1) % k]);
            assert_eq!(g.edge_index(a, b), Some(c.edges[i]));
        }
    }

    #[test]
    fn log2_and_threshold() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(16), 4);
        assert_eq!(ceil_log2(17), 5);
        assert_eq!(default_threshold(4), 4);
        assert_eq!(default_threshold(2), 3);
    }

    #[test]
    fn c4_is_one_short_cycle() {
        let g = cycle(4);
        let p = cycle_partition(&g, 4);
        assert_eq!(p.short_cycles.len(), 1);
        assert!(p.residual.is_empty());
        check_cycle(&g, &p.short_cycles[0]);
    }

    #[test]
    fn long_cycle_is_residual() {
        let g = cycle(16);
        let p = cycle_partition(&g, default_threshold(16));
        assert!(p.short_cycles.is_empty());
        assert_eq!(p.residual.len(), 16);
    }

    #[test]
    fn k33_leaves_a_tree() {
        let g = complete_bipartite(3, 3);
        let p = cycle_partition(&g, 6);
        assert_eq!(p.short_cycles.len(), 1);
        assert_eq!(p.short_cycles[0].len(), 4);
        assert_eq!(p.residual.len(), 5);
        assert!(is_forest(&g, &p.residual));
    }

    #[test]
    fn shortest_first_on_k5() {
        let g = complete(5);
        let p = cycle_partition(&g, 5);
        let lens: Vec<usize> = p.short_cycles.iter().map(Cycle::len).collect();
        assert!(lens.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(lens[0], 3);
        for c in &p.short_cycles {
            check_cycle(&g, c);
        }
        let used: usize = lens.iter().sum::<usize>() + p.residual.len();
        assert_eq!(used, g.m());
    }

    #[test]
    fn decomposes_bowtie() {
        let g = Graph::new(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)], None).unwrap();
        let cycles = decompose_even_into_cycles(&g).unwrap();
        assert_eq!(cycles.len(), 2);
        assert!(cycles.iter().all(|c| c.len() == 3));
        for c in &cycles {
            check_cycle(&g, c);
        }
    }

    #[test]
    fn decomposition_edge_cases() {
        assert!(decompose_even_into_cycles(&Graph::empty(3)).unwrap().is_empty());
        let c6 = decompose_even_into_cycles(&cycle(6)).unwrap();
        assert_eq!(c6.len(), 1);
        assert_eq!(c6[0].len(), 6);
        assert!(decompose_even_into_cycles(&complete(4)).is_err());
        let k5 = complete(5);
        let cs = decompose_even_into_cycles(&k5).unwrap();
        assert_eq!(cs.iter().map(Cycle::len).sum::<usize>(), 10);
        for c in &cs {
            check_cycle(&k5, c);
        }
    }
}
