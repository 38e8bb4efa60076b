//! Perfect matchings of bipartite graphs (Hopcroft–Karp).

use std::collections::VecDeque;

use super::FactorError;
use crate::graph::Graph;

const FREE: usize = usize::MAX;

/// A perfect matching as sorted canonical edge indices.
///
/// Left vertices are those on the side of vertex 0 (per
/// [`Graph::bipartition`]); searches scan vertices and neighbors in
/// increasing order, so the result depends only on the canonical graph.
pub fn find_perfect_matching(g: &Graph) -> Result<Vec<usize>, FactorError> {
    let side = g.bipartition().ok_or(FactorError::NotBipartite)?;
    let left: Vec<usize> = (0..g.n()).filter(|&v| !side[v]).collect();
    let right_count = g.n() - left.len();
    if left.len() != right_count {
        return Err(FactorError::UnbalancedSides {
            left: left.len(),
            right: right_count,
        });
    }
    let n = g.n();
    let mut mate = vec![FREE; n];
    let mut dist = vec![usize::MAX; n];
    let mut matched = 0;
    loop {
        // layer the free left vertices and everything reachable by alternating paths
        let mut queue = VecDeque::new();
        for &u in &left {
            if mate[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                let w = mate[v];
                if w == FREE {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        for &u in &left {
            if mate[u] == FREE && augment(g, u, &mut mate, &mut dist) {
                matched += 1;
            }
        }
    }
    if matched != left.len() {
        return Err(FactorError::NoPerfectMatching { matched, needed: left.len() });
    }
    let mut edges: Vec<usize> = left.iter().map(|&u| g.edge_index(u, mate[u]).unwrap()).collect();
    edges.sort_unstable();
    Ok(edges)
}

fn augment(g: &Graph, u: usize, mate: &mut [usize], dist: &mut [usize]) -> bool {
    for &v in g.neighbors(u) {
        let w = mate[v];
        let ok = if w == FREE {
            true
        } else if dist[w] == dist[u].wrapping_add(1) {
            augment(g, w, mate, dist)
        } else {
            false
        };
        if ok {
            mate[u] = v;
            mate[v] = u;
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::{complete_bipartite, cycle, random_regular_bipartite};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_perfect(g: &Graph, m: &[usize]) {
        let mut hit = vec![0; g.n()];
        for &e in m {
            let (u, v) = g.edges()[e];
            hit[u] += 1;
            hit[v] += 1;
        }
        assert!(hit.iter().all(|&h| h == 1));
    }

    #[test]
    fn c4_matching_is_canonical() {
        let g = cycle(4);
        let m = find_perfect_matching(&g).unwrap();
        let pairs: Vec<_> = m.iter().map(|&e| g.edges()[e]).collect();
        assert_eq!(pairs, vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn regular_bipartite_graphs_have_perfect_matchings() {
        assert_perfect(&complete_bipartite(3, 3), &find_perfect_matching(&complete_bipartite(3, 3)).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..6 {
            let g = random_regular_bipartite(40, d, &mut rng);
            assert_perfect(&g, &find_perfect_matching(&g).unwrap());
        }
    }

    #[test]
    fn star_and_odd_cycle_are_rejected() {
        assert!(matches!(
            find_perfect_matching(&complete_bipartite(1, 3)),
            Err(FactorError::UnbalancedSides { left: 1, right: 3 })
        ));
        assert_eq!(find_perfect_matching(&cycle(5)), Err(FactorError::NotBipartite));
        let p = Graph::new(4, &[(0, 1), (0, 3), (2, 3)], None).unwrap();
        assert!(find_perfect_matching(&p).is_ok());
        let claw_pair = Graph::new(6, &[(0, 1), (0, 3), (0, 5), (2, 1), (4, 1)], None).unwrap();
        assert!(matches!(
            find_perfect_matching(&claw_pair),
            Err(FactorError::NoPerfectMatching { .. })
        ));
    }
}
