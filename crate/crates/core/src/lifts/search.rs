//! Searching for signings with small signed spectral radius.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use crate::graph::{Graph, Signing};
use crate::rng::{substream, Stream};
use crate::spectral::{eigenvalues, eigh};

/// Exhaustive search is used up to this many independent cycles.
pub const EXHAUSTIVE_CYCLE_RANK: usize = 20;

/// Tolerance added to thresholds before declaring a signing good enough.
pub const MEET_TOL: f64 = 1e-9;

const EXHAUSTIVE_CHUNK: u64 = 1 << 10;
const RESTART_BATCH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    /// Every signing up to switching (spanning forest fixed to `+1`).
    Exhaustive { candidates: u64 },
    /// Random starts followed by eigenvector-guided flips.
    Restarts { restarts: usize },
}

#[derive(Debug, Clone)]
pub struct SigningCertificate {
    pub signing: Signing,
    pub lambda1_of_as: f64,
    /// Spectral norm of `A_s`; equals `λ_1` for bipartite graphs.
    pub norm_of_as: f64,
    pub threshold: f64,
    pub met: bool,
    pub method: SearchMethod,
}

fn spectrum_ends(g: &Graph, signs: &[i8]) -> (f64, f64) {
    let a = crate::graph::signed_adjacency(g, signs);
    let v = eigenvalues(&a).expect("symmetric");
    match (v.first(), v.last()) {
        (Some(&hi), Some(&lo)) => (hi, hi.abs().max(lo.abs())),
        _ => (0.0, 0.0),
    }
}

/// Edge indices of a spanning forest (breadth-first, smallest vertex first)
/// and the remaining edges, each sorted.
fn forest_split(g: &Graph) -> (Vec<usize>, Vec<usize>) {
    let mut seen = vec![false; g.n()];
    let mut in_forest = vec![false; g.m()];
    for s in 0..g.n() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in g.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    in_forest[g.edge_index(x, y).unwrap()] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    let forest = (0..g.m()).filter(|&e| in_forest[e]).collect();
    let rest = (0..g.m()).filter(|&e| !in_forest[e]).collect();
    (forest, rest)
}

/// Searches for a signing of `g` whose signed adjacency matrix has spectral
/// norm at most `threshold` (`2√(d−1)` for the Ramanujan case).
///
/// With at most [`EXHAUSTIVE_CYCLE_RANK`] independent cycles every
/// switching class is visited and the first qualifying signing in
/// enumeration order is returned (or the overall minimizer). Otherwise
/// `budget` random restarts are refined by local flips.
pub fn search_signing(g: &Graph, threshold: f64, budget: usize, rng: &mut Stream) -> SigningCertificate {
    let (_, rest) = forest_split(g);
    if rest.len() <= EXHAUSTIVE_CYCLE_RANK {
        exhaustive(g, threshold, &rest)
    } else {
        restarts(g, threshold, budget, rng)
    }
}

/// [`search_signing`] at the Ramanujan threshold `2√(d−1)`, `d` the maximum degree.
pub fn search_ramanujan_signing(g: &Graph, budget: usize, rng: &mut Stream) -> SigningCertificate {
    let d = g.max_degree();
    let threshold = if d == 0 { 0.0 } else { 2.0 * ((d - 1) as f64).sqrt() };
    search_signing(g, threshold, budget, rng)
}

fn certificate(g: &Graph, signs: Vec<i8>, threshold: f64, method: SearchMethod) -> SigningCertificate {
    let (lambda1, norm) = spectrum_ends(g, &signs);
    SigningCertificate {
        signing: Signing::new(g.clone(), signs).expect("aligned signs"),
        lambda1_of_as: lambda1,
        norm_of_as: norm,
        threshold,
        met: norm <= threshold + MEET_TOL,
        method,
    }
}

fn signs_for_mask(m: usize, free: &[usize], mask: u64) -> Vec<i8> {
    let mut signs = vec![1i8; m];
    for (bit, &e) in free.iter().enumerate() {
        if mask >> bit & 1 == 1 {
            signs[e] = -1;
        }
    }
    signs
}

fn exhaustive(g: &Graph, threshold: f64, free: &[usize]) -> SigningCertificate {
    let total = 1u64 << free.len();
    let mut best: Option<(f64, u64)> = None;
    let mut start = 0;
    while start < total {
        let end = (start + EXHAUSTIVE_CHUNK).min(total);
        let chunk: Vec<(u64, f64)> = (start..end)
            .into_par_iter()
            .map(|mask| (mask, spectrum_ends(g, &signs_for_mask(g.m(), free, mask)).1))
            .collect();
        for (mask, norm) in chunk {
            if norm <= threshold + MEET_TOL {
                return certificate(
                    g,
                    signs_for_mask(g.m(), free, mask),
                    threshold,
                    SearchMethod::Exhaustive { candidates: mask + 1 },
                );
            }
            if best.is_none_or(|(b, _)| norm < b) {
                best = Some((norm, mask));
            }
        }
        start = end;
    }
    let mask = best.map_or(0, |(_, m)| m);
    certificate(
        g,
        signs_for_mask(g.m(), free, mask),
        threshold,
        SearchMethod::Exhaustive { candidates: total },
    )
}

/// Greedy descent: flip the edge that most lowers the Rayleigh quotient of
/// the extreme eigenvector, keep the flip if the norm drops.
fn local_descent(g: &Graph, signs: &mut [i8], threshold: f64, max_steps: usize) -> f64 {
    let extreme = |signs: &[i8]| -> (f64, f64, DVector<f64>) {
        let e = eigh(&crate::graph::signed_adjacency(g, signs)).expect("symmetric");
        let (hi, lo) = (e.values[0], *e.values.last().unwrap());
        let (col, mu) = if hi >= -lo { (0, hi) } else { (e.values.len() - 1, lo) };
        (mu.abs(), mu.signum(), e.vectors.column(col).into_owned())
    };
    let (mut norm, mut dir, mut x) = extreme(signs);
    for _ in 0..max_steps {
        if norm <= threshold + MEET_TOL {
            break;
        }
        let mut scored: Vec<(f64, usize)> = g
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| (dir * f64::from(signs[e]) * x[u] * x[v], e))
            .filter(|&(s, _)| s > 0.0)
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut improved = false;
        for &(_, e) in scored.iter().take(4) {
            signs[e] = -signs[e];
            let (n2, d2, x2) = extreme(signs);
            if n2 < norm - 1e-12 {
                (norm, dir, x) = (n2, d2, x2);
                improved = true;
                break;
            }
            signs[e] = -signs[e];
        }
        if !improved {
            break;
        }
    }
    norm
}

fn restarts(g: &Graph, threshold: f64, budget: usize, rng: &mut Stream) -> SigningCertificate {
    let seed: u64 = rng.gen();
    let budget = budget.max(1);
    let max_steps = 2 * g.m();
    let mut best: Option<(f64, Vec<i8>)> = None;
    let mut start = 0;
    while start < budget {
        let end = (start + RESTART_BATCH).min(budget);
        let batch: Vec<(f64, Vec<i8>)> = (start..end)
            .into_par_iter()
            .map(|i| {
                let mut r = substream(seed, i as u64);
                let mut signs: Vec<i8> = (0..g.m()).map(|_| if r.gen::<bool>() { 1 } else { -1 }).collect();
                let norm = local_descent(g, &mut signs, threshold, max_steps);
                (norm, signs)
            })
            .collect();
        for (offset, (norm, signs)) in batch.into_iter().enumerate() {
            if norm <= threshold + MEET_TOL {
                return certificate(
                    g,
                    signs,
                    threshold,
                    SearchMethod::Restarts { restarts: start + offset + 1 },
                );
            }
            if best.as_ref().is_none_or(|(b, _)| norm < *b) {
                best = Some((norm, signs));
            }
        }
        start = end;
    }
    let (_, signs) = best.expect("at least one restart");
    certificate(g, signs, threshold, SearchMethod::Restarts { restarts: budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::{complete_bipartite, cycle, random_regular_bipartite};

    #[test]
    fn c4_trivial_signing_meets() {
        let c = search_ramanujan_signing(&cycle(4), 1, &mut substream(0, 0));
        assert!(c.met);
        assert_eq!(c.signing.signs(), &[1, 1, 1, 1]);
        assert!((c.lambda1_of_as - 2.0).abs() < 1e-12);
    }

    #[test]
    fn k33_has_a_ramanujan_signing() {
        let c = search_ramanujan_signing(&complete_bipartite(3, 3), 1, &mut substream(0, 0));
        assert!(c.met);
        assert!(c.lambda1_of_as <= 8f64.sqrt() + 1e-9);
        assert!(matches!(c.method, SearchMethod::Exhaustive { .. }));
    }

    #[test]
    fn restarts_find_ramanujan_signings_of_small_cubic_graphs() {
        let mut rng = substream(4, 0);
        let g = random_regular_bipartite(20, 3, &mut rng);
        let c = search_ramanujan_signing(&g, 32, &mut rng);
        assert!(matches!(c.method, SearchMethod::Restarts { .. }));
        assert!(c.met, "best {}", c.norm_of_as);
    }

    #[test]
    fn forest_split_counts_cycle_rank() {
        let g = complete_bipartite(3, 4);
        let (forest, rest) = forest_split(&g);
        assert_eq!(forest.len(), 6);
        assert_eq!(rest.len(), 12 - 6);
    }
}
