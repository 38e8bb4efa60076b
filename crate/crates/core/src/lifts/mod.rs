//! Ramanujan 2-lifts, `M′`-signings built from factors, and the
//! multiplicity-incrementing lift.

mod increment;
mod search;

use thiserror::Error;

use crate::factors::FactorError;
use crate::graph::{two_lift, Graph, GraphError, Signing};
use crate::pipeline::MatrixTriple;
use crate::rng::{fork, Stream};
use crate::spectral::{lambda_max, SpectralError};

pub use increment::{
    increment_multiplicity, paper_lift_count, ExactCheck, FactorOutcome, FactorRecord, FactorSearch, IncrementCertificate,
    IncrementConfig, LiftMode,
};
pub use search::{
    search_ramanujan_signing, search_signing, SearchMethod, SigningCertificate, EXHAUSTIVE_CYCLE_RANK, MEET_TOL,
};

#[derive(Debug, Error)]
pub enum LiftError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("graph is not regular bipartite and carries no part labels")]
    NotLiftable,
    #[error("graph is not a graph lift of M")]
    NotGraphLift,
    #[error("lift step {step}: best signing of layer ({i},{j}) has norm {best} > {threshold}")]
    SearchFailed {
        step: usize,
        i: usize,
        j: usize,
        best: f64,
        threshold: f64,
    },
    #[error("second eigenvalue {lambda2} exceeds target {target}")]
    Precondition { lambda2: f64, target: f64 },
    #[error("factor for layer ({i},{j}) is not {want}-regular")]
    FactorDegree { i: usize, j: usize, want: i64 },
    #[error("factor edge {edge} does not lie in layer ({i},{j})")]
    FactorEdge { edge: usize, i: usize, j: usize },
    #[error("vertex {vertex}: signed degree towards part {j} is {got}, expected {want}")]
    SignedDegree { vertex: usize, j: usize, got: i64, want: i64 },
    #[error("infeasible at desk scale: {n} vertices need t = {t} lifts ({log2_size:.1} bits of vertices), cap {cap}")]
    Infeasible { n: usize, t: u64, log2_size: f64, cap: usize },
}

/// One Ramanujan lift step: the layer searches and the combined signing.
#[derive(Debug, Clone)]
pub struct LiftStep {
    pub n_before: usize,
    /// `(i, j, certificate)` per layer; a single `(0, 1, ..)` entry when the
    /// graph has no part labels.
    pub layers: Vec<(usize, usize, SigningCertificate)>,
    pub combined_lambda1: f64,
    /// `Σ_{i<j} 2√(M_ij)`.
    pub combined_bound: f64,
}

#[derive(Debug, Clone)]
pub struct LiftChain {
    pub graph: Graph,
    pub steps: Vec<LiftStep>,
}

/// Part labels to use for layer-wise work: the stored ones, or a
/// 2-coloring for unlabeled bipartite graphs.
pub(crate) fn layer_labels(g: &Graph) -> Option<Vec<usize>> {
    match g.parts() {
        Some(p) => Some(p.to_vec()),
        None => g.bipartition().map(|b| b.into_iter().map(usize::from).collect()),
    }
}

/// One Ramanujan signing of `g`, searched independently on every layer
/// `G[V_i ⊔ V_j]` and combined.
pub fn ramanujan_signing(g: &Graph, budget: usize, step: usize, rng: &mut Stream) -> Result<(Signing, LiftStep), LiftError> {
    let labels = layer_labels(g).ok_or(LiftError::NotLiftable)?;
    let labeled = g.with_parts(Some(labels))?;
    let k = labeled.num_parts();
    let mut signs = vec![1i8; g.m()];
    let mut layers = Vec::new();
    let mut bound = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            let layer = labeled.part_pair(i, j);
            if layer.graph.m() == 0 {
                continue;
            }
            let deg = layer.graph.max_degree();
            bound += 2.0 * (deg as f64).sqrt();
            let mut sub = fork(rng);
            let cert = search_ramanujan_signing(&layer.graph, budget, &mut sub);
            if !cert.met {
                return Err(LiftError::SearchFailed {
                    step,
                    i,
                    j,
                    best: cert.norm_of_as,
                    threshold: cert.threshold,
                });
            }
            for (local, &global) in layer.edge_ids.iter().enumerate() {
                signs[global] = cert.signing.signs()[local];
            }
            layers.push((i, j, cert));
        }
    }
    let signing = Signing::new(g.clone(), signs)?;
    let combined = lambda_max(&signing.signed_adjacency())?;
    Ok((
        signing,
        LiftStep {
            n_before: g.n(),
            layers,
            combined_lambda1: combined,
            combined_bound: bound,
        },
    ))
}

/// `t` successive Ramanujan 2-lifts. Eigenvalues above the combined bound
/// keep their multiplicity; their eigenvectors become `x ⊕ x`.
pub fn ramanujan_lift_iterate(g: &Graph, t: usize, budget: usize, rng: &mut Stream) -> Result<LiftChain, LiftError> {
    let mut graph = g.clone();
    let mut steps = Vec::with_capacity(t);
    for step in 0..t {
        let (signing, record) = ramanujan_signing(&graph, budget, step, rng)?;
        graph = two_lift(&signing);
        steps.push(record);
    }
    Ok(LiftChain { graph, steps })
}

/// Assembles the `M′`-signing in which exactly the edges of the given
/// factors are negative. `factors` lists `((i, j), edge indices)` with
/// `i < j`; layers with `D_ij > 0` must all be present.
pub fn signing_from_factors(
    g: &Graph,
    triple: &MatrixTriple,
    factors: &[((usize, usize), Vec<usize>)],
) -> Result<Signing, LiftError> {
    let parts = g.parts().ok_or(LiftError::NotGraphLift)?;
    let d = triple.d_matrix();
    let k = triple.k();
    if g.num_parts() != k {
        return Err(LiftError::NotGraphLift);
    }
    let mut signs = vec![1i8; g.m()];
    let mut covered = vec![vec![false; k]; k];
    for &((i, j), ref edges) in factors {
        let mut deg = vec![0i64; g.n()];
        for &e in edges {
            let (u, v) = g.edges()[e];
            let (pu, pv) = (parts[u], parts[v]);
            if !((pu == i && pv == j) || (pu == j && pv == i)) {
                return Err(LiftError::FactorEdge { edge: e, i, j });
            }
            deg[u] += 1;
            deg[v] += 1;
            signs[e] = -1;
        }
        let want = d.get(i, j);
        if (0..g.n()).any(|v| (parts[v] == i || parts[v] == j) && deg[v] != want) {
            return Err(LiftError::FactorDegree { i, j, want });
        }
        covered[i][j] = true;
        covered[j][i] = true;
    }
    for i in 0..k {
        for j in i + 1..k {
            if d.get(i, j) > 0 && !covered[i][j] {
                return Err(LiftError::FactorDegree { i, j, want: d.get(i, j) });
            }
        }
    }
    let signing = Signing::new(g.clone(), signs)?;
    check_signed_degrees(&signing, triple)?;
    Ok(signing)
}

/// Every vertex of `V_i` has signed degree `M′_ij` towards `V_j`.
pub fn check_signed_degrees(s: &Signing, triple: &MatrixTriple) -> Result<(), LiftError> {
    let g = s.base();
    let parts = g.parts().ok_or(LiftError::NotGraphLift)?;
    let k = triple.k();
    let mut sums = vec![vec![0i64; k]; g.n()];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let sign = i64::from(s.signs()[e]);
        sums[u][parts[v]] += sign;
        sums[v][parts[u]] += sign;
    }
    for (v, row) in sums.iter().enumerate() {
        for (j, &got) in row.iter().enumerate() {
            let want = triple.mp.get(parts[v], j);
            if got != want {
                return Err(LiftError::SignedDegree { vertex: v, j, got, want });
            }
        }
    }
    Ok(())
}

/// All `a`-factors of `g` as sorted edge-index lists, in lexicographic
/// order of inclusion decisions (edges taken before skipped), stopping
/// after `limit` factors.
pub fn enumerate_factors(g: &Graph, a: usize, limit: usize) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..g.n()).map(|v| g.degree(v)).collect();
    let mut deg = vec![0usize; g.n()];
    let mut chosen = Vec::new();
    let mut out = Vec::new();
    enumerate_rec(g, a, 0, &mut remaining, &mut deg, &mut chosen, &mut out, limit);
    out
}

#[allow(clippy::too_many_arguments)]
fn enumerate_rec(
    g: &Graph,
    a: usize,
    e: usize,
    remaining: &mut [usize],
    deg: &mut [usize],
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if e == g.m() {
        if deg.iter().all(|&x| x == a) {
            out.push(chosen.clone());
        }
        return;
    }
    let (u, v) = g.edges()[e];
    remaining[u] -= 1;
    remaining[v] -= 1;
    if deg[u] < a && deg[v] < a {
        deg[u] += 1;
        deg[v] += 1;
        chosen.push(e);
        enumerate_rec(g, a, e + 1, remaining, deg, chosen, out, limit);
        chosen.pop();
        deg[u] -= 1;
        deg[v] -= 1;
    }
    if deg[u] + remaining[u] >= a && deg[v] + remaining[v] >= a {
        enumerate_rec(g, a, e + 1, remaining, deg, chosen, out, limit);
    }
    remaining[u] += 1;
    remaining[v] += 1;
}
