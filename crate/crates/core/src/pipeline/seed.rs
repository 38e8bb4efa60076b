//! Seed graphs for the two matrix families.

use thiserror::Error;

use super::{Family, MatrixTriple};
use crate::graph::{families::complete_bipartite, Edge, Graph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeedError {
    #[error("no seed graph for custom triples")]
    Unsupported,
}

/// Vertex count of the seed for `triple`, without building it.
pub fn seed_size(triple: &MatrixTriple) -> Result<usize, SeedError> {
    match triple.family {
        Family::Integer { d, .. } => Ok(2 * d as usize),
        Family::Surd { t, .. } => Ok(4 * t as usize),
        Family::Custom => Err(SeedError::Unsupported),
    }
}

/// `K_{d,d}` for the integer family; for the surd family four parts of size
/// `t`, complete bipartite graphs on the `t`-pairs and the circulant
/// `i → i, i+1, i+2 (mod t)` on the `3`-pairs.
pub fn seed_graph(triple: &MatrixTriple) -> Result<Graph, SeedError> {
    match triple.family {
        Family::Integer { d, .. } => Ok(complete_bipartite(d as usize, d as usize)),
        Family::Surd { t, .. } => Ok(surd_seed(t as usize)),
        Family::Custom => Err(SeedError::Unsupported),
    }
}

fn surd_seed(t: usize) -> Graph {
    let at = |part: usize, i: usize| part * t + i;
    let mut edges: Vec<Edge> = Vec::new();
    for (p, q) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
        for i in 0..t {
            for j in 0..t {
                edges.push((at(p, i), at(q, j)));
            }
        }
    }
    for (p, q) in [(0, 3), (1, 2)] {
        for i in 0..t {
            for s in 0..3 {
                edges.push((at(p, i), at(q, (i + s) % t)));
            }
        }
    }
    let parts = (0..4 * t).map(|v| v / t).collect();
    Graph::new(4 * t, &edges, Some(parts)).expect("valid seed")
}
