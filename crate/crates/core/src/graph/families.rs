//! Standard graphs and generators used by examples, tests and the CLI.

use std::collections::HashMap;

use rand::Rng;

use super::{Edge, Graph};

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs at least 3 vertices");
    let edges: Vec<Edge> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::new(n, &edges, None).unwrap()
}

pub fn path(n: usize) -> Graph {
    let edges: Vec<Edge> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::new(n, &edges, None).unwrap()
}

pub fn complete(n: usize) -> Graph {
    let edges: Vec<Edge> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    Graph::new(n, &edges, None).unwrap()
}

/// `K_{a,b}` with vertices `0..a` in part 0 and `a..a+b` in part 1.
pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    let edges: Vec<Edge> = (0..a).flat_map(|i| (a..a + b).map(move |j| (i, j))).collect();
    let parts = (0..a + b).map(|v| usize::from(v >= a)).collect();
    Graph::new(a + b, &edges, Some(parts)).unwrap()
}

pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::new(10, &edges, None).unwrap()
}

/// `d`-regular bipartite circulant: left `i` joined to right `half + (i + s) mod half`
/// for `s` in `0..d`.
pub fn circulant_bipartite(half: usize, d: usize) -> Graph {
    assert!(d <= half);
    let edges: Vec<Edge> = (0..half)
        .flat_map(|i| (0..d).map(move |s| (i, half + (i + s) % half)))
        .collect();
    let parts = (0..2 * half).map(|v| usize::from(v >= half)).collect();
    Graph::new(2 * half, &edges, Some(parts)).unwrap()
}

/// Random simple `d`-regular bipartite graph with `half` vertices per side,
/// obtained from the circulant by random degree-preserving double-edge
/// switches (10 sweeps over the edge set).
pub fn random_regular_bipartite<R: Rng + ?Sized>(half: usize, d: usize, rng: &mut R) -> Graph {
    assert!(d <= half, "degree exceeds side size");
    let mut right: Vec<Vec<usize>> = (0..half).map(|i| (0..d).map(|s| (i + s) % half).collect()).collect();
    let mut edges: Vec<(usize, usize)> = (0..half).flat_map(|i| (0..d).map(move |s| (i, (i + s) % half))).collect();
    let m = edges.len();
    if m >= 2 {
        for _ in 0..10 * m {
            let e1 = rng.gen_range(0..m);
            let e2 = rng.gen_range(0..m);
            let (a, b) = edges[e1];
            let (c, e) = edges[e2];
            if a == c || b == e || right[a].contains(&e) || right[c].contains(&b) {
                continue;
            }
            let pb = right[a].iter().position(|&x| x == b).unwrap();
            right[a][pb] = e;
            let pe = right[c].iter().position(|&x| x == e).unwrap();
            right[c][pe] = b;
            edges[e1] = (a, e);
            edges[e2] = (c, b);
        }
    }
    let global: Vec<Edge> = edges.iter().map(|&(l, r)| (l, half + r)).collect();
    let parts = (0..2 * half).map(|v| usize::from(v >= half)).collect();
    Graph::new(2 * half, &global, Some(parts)).unwrap()
}

/// All `d`-regular bipartite graphs with `half` vertices per side, up to
/// isomorphism (including swapping the sides). Exhaustive; intended for
/// `half <= 7`.
pub fn regular_bipartite_catalog(half: usize, d: usize) -> Vec<Graph> {
    assert!(half <= 8 && d <= half);
    let masks: Vec<u8> = (0u16..1 << half)
        .filter(|m| m.count_ones() as usize == d)
        .map(|m| m as u8)
        .collect();
    let perms = permutation_tables(half);
    let mut seen: HashMap<Vec<u8>, ()> = HashMap::new();
    let mut reps: Vec<Vec<u8>> = Vec::new();
    let mut rows = Vec::with_capacity(half);
    let mut cols = vec![0usize; half];
    enumerate_rows(&masks, 0, half, d, &mut rows, &mut cols, &mut |rows: &[u8]| {
        let canon = canonical_form(rows, half, &perms);
        if seen.insert(canon.clone(), ()).is_none() {
            reps.push(canon);
        }
    });
    reps.sort();
    reps.into_iter()
        .map(|rows| {
            let edges: Vec<Edge> = rows
                .iter()
                .enumerate()
                .flat_map(|(i, &r)| (0..half).filter(move |&c| r >> c & 1 == 1).map(move |c| (i, half + c)))
                .collect();
            let parts = (0..2 * half).map(|v| usize::from(v >= half)).collect();
            Graph::new(2 * half, &edges, Some(parts)).unwrap()
        })
        .collect()
}

fn enumerate_rows(
    masks: &[u8],
    start: usize,
    half: usize,
    d: usize,
    rows: &mut Vec<u8>,
    cols: &mut [usize],
    emit: &mut dyn FnMut(&[u8]),
) {
    if rows.len() == half {
        emit(rows);
        return;
    }
    for (idx, &mask) in masks.iter().enumerate().skip(start) {
        if (0..half).any(|c| mask >> c & 1 == 1 && cols[c] == d) {
            continue;
        }
        for c in (0..half).filter(|&c| mask >> c & 1 == 1) {
            cols[c] += 1;
        }
        rows.push(mask);
        enumerate_rows(masks, idx, half, d, rows, cols, emit);
        rows.pop();
        for c in (0..half).filter(|&c| mask >> c & 1 == 1) {
            cols[c] -= 1;
        }
    }
}

/// For every permutation of the columns, a lookup table mask → permuted mask.
fn permutation_tables(half: usize) -> Vec<Vec<u8>> {
    let mut perm: Vec<usize> = (0..half).collect();
    let mut tables = Vec::new();
    loop {
        let table = (0u16..1 << half)
            .map(|m| {
                (0..half)
                    .filter(|&c| m >> c & 1 == 1)
                    .fold(0u8, |acc, c| acc | 1 << perm[c])
            })
            .collect();
        tables.push(table);
        if !next_permutation(&mut perm) {
            return tables;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn transpose(rows: &[u8], half: usize) -> Vec<u8> {
    (0..half)
        .map(|c| {
            rows.iter()
                .enumerate()
                .filter(|(_, &r)| r >> c & 1 == 1)
                .fold(0u8, |acc, (i, _)| acc | 1 << i)
        })
        .collect()
}

fn canonical_form(rows: &[u8], half: usize, perms: &[Vec<u8>]) -> Vec<u8> {
    let mut best: Option<Vec<u8>> = None;
    let mut buf = vec![0u8; half];
    for variant in [rows.to_vec(), transpose(rows, half)] {
        for table in perms {
            for (b, &r) in buf.iter_mut().zip(&variant) {
                *b = table[r as usize];
            }
            buf.sort_unstable();
            if best.as_ref().is_none_or(|b| buf < *b) {
                best = Some(buf.clone());
            }
        }
    }
    best.unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn petersen_is_cubic() {
        let p = petersen();
        assert_eq!(p.m(), 15);
        assert_eq!(p.regularity(), Some(3));
    }

    #[test]
    fn random_regular_bipartite_is_regular_and_simple() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (half, d) in [(8, 3), (32, 8), (16, 16), (5, 1)] {
            let g = random_regular_bipartite(half, d, &mut rng);
            assert_eq!(g.regularity(), Some(d));
            assert_eq!(g.m(), half * d);
            assert!(g.bipartition().is_some());
        }
    }

    #[test]
    fn cubic_bipartite_catalog_counts() {
        // cubic bipartite graphs up to isomorphism, connected or not
        let counts: Vec<usize> = (3..=6).map(|h| regular_bipartite_catalog(h, 3).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6]);
    }
}
