//! Random `a`-factors of regular bipartite graphs together with the
//! auxiliary matrix `M` that makes `A_H − (a/d)A_G + M` concentrate.
//!
//! `M` is always supported on the edges of the base graph, so it is stored
//! as one weight per canonical edge.

mod concentration;
mod cycles;
mod matching;

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rand::Rng;
use thiserror::Error;

use crate::graph::{Edge, Graph};
use crate::report::Section;
use crate::rng::{fork, Stream};
use crate::spectral::{edge_weighted_lambda_max, edge_weighted_norm};

pub use concentration::{
    concentration_stats, select_concentrated_factor, select_with_compression, Selection, TailReport, TailRow,
};
pub use cycles::{ceil_log2, cycle_partition, decompose_even_into_cycles, default_threshold, Cycle, CyclePartition};
pub use matching::find_perfect_matching;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorError {
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("graph is not regular")]
    NotRegular,
    #[error("half-factors need an even degree, got {0}")]
    OddDegree(usize),
    #[error("factor degree {a} outside 0..={d}")]
    DegreeOutOfRange { a: usize, d: usize },
    #[error("vertex {0} has odd degree")]
    OddDegreeVertex(usize),
    #[error("sides have different sizes ({left} vs {right})")]
    UnbalancedSides { left: usize, right: usize },
    #[error("maximum matching covers {matched} of {needed} left vertices")]
    NoPerfectMatching { matched: usize, needed: usize },
    #[error("subspace basis has {got} rows, graph has {n} vertices")]
    BasisDimension { got: usize, n: usize },
    #[error("subspace basis is not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("no factor within {bound} after {trials} trials (best {best})")]
    BudgetExhausted { trials: usize, best: f64, bound: f64 },
}

/// `c_1 = 0`, `c_d = c_{d−1} + 1` for odd `d`, `c_d = c_{d/2} + √(2d)` for even `d`.
pub fn c_bound(d: usize) -> f64 {
    assert!(d >= 1, "c_bound is defined for d >= 1");
    let mut acc = 0.0;
    let mut d = d;
    while d > 1 {
        if d % 2 == 1 {
            acc += 1.0;
            d -= 1;
        } else {
            acc += (2.0 * d as f64).sqrt();
            d /= 2;
        }
    }
    acc
}

/// Audit record for one half-factor step anywhere in the recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfAudit {
    /// Degree of the graph being halved.
    pub degree: usize,
    pub short_cycles: usize,
    pub residual_edges: usize,
    /// `‖M‖` of this step; bounded by `√(2d)`.
    pub m_norm: f64,
    /// `λ_1` of the residual graph; bounded by `2√(2d)`.
    pub residual_lambda1: f64,
}

/// An `a`-factor `H` of a `d`-regular bipartite base graph and its matrix `M`.
#[derive(Debug, Clone)]
pub struct FactorSample {
    pub base: Arc<Graph>,
    pub d: usize,
    pub a: usize,
    /// Canonical base-edge indices of `H`, sorted.
    pub h_edges: Vec<usize>,
    /// `M` as weights on the base edges.
    pub m_weights: Vec<f64>,
    /// One record per half-factor step (empty unless auditing).
    pub half_audits: Vec<HalfAudit>,
}

impl FactorSample {
    pub fn h(&self) -> Graph {
        self.base.spanning_subgraph(&self.h_edges)
    }

    pub fn in_h(&self) -> Vec<bool> {
        let mut mask = vec![false; self.base.m()];
        for &e in &self.h_edges {
            mask[e] = true;
        }
        mask
    }

    pub fn m_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.base.n(), self.base.n());
        for (&(u, v), &w) in self.base.edges().iter().zip(&self.m_weights) {
            m[(u, v)] = w;
            m[(v, u)] = w;
        }
        m
    }

    /// Spectral norm of `M`, computed per connected block of its support.
    pub fn m_norm(&self) -> f64 {
        edge_weighted_norm(self.base.n(), self.base.edges(), &self.m_weights)
    }

    /// Exact degree check of `H` against `a`.
    pub fn is_a_regular(&self) -> bool {
        let mut deg = vec![0usize; self.base.n()];
        for &e in &self.h_edges {
            let (u, v) = self.base.edges()[e];
            deg[u] += 1;
            deg[v] += 1;
        }
        deg.iter().all(|&x| x == self.a)
    }

    /// Edge weights of `A_H − (a/d)A_G + M`.
    pub fn centered_weights(&self) -> Vec<f64> {
        let ratio = if self.d == 0 { 0.0 } else { self.a as f64 / self.d as f64 };
        let mask = self.in_h();
        mask.iter()
            .zip(&self.m_weights)
            .map(|(&inh, &w)| f64::from(u8::from(inh)) - ratio + w)
            .collect()
    }

    pub fn to_section(&self, name: &str, base_ref: &str) -> Section {
        let mut s = Section::new(name);
        let norm = self.m_norm();
        let bound = if self.d == 0 { 0.0 } else { c_bound(self.d) };
        s.push("base", base_ref)
            .push("n", self.base.n())
            .push("d", self.d)
            .push("a", self.a)
            .push("factor_edges", self.h_edges.len())
            .push("a_regular", self.is_a_regular())
            .push("m_norm", norm)
            .push("c_d", bound)
            .push("six_sqrt_d", 6.0 * (self.d as f64).sqrt())
            .push("m_norm_within_c_d", norm <= bound + 1e-9);
        s
    }
}

/// Deterministic half-factor data of one graph: the cycle partition and the
/// fixed alternating choices on the residual.
#[derive(Debug)]
struct HalfData {
    short_cycles: Vec<Cycle>,
    /// Fixed residual half, as edge indices.
    h0: Vec<usize>,
    /// Residual edges with their `M` weight (`−½` in `H_0`, `+½` otherwise).
    m0: Vec<(usize, f64)>,
    audit: OnceLock<HalfAudit>,
}

impl HalfData {
    fn build(g: &Graph, threshold: usize) -> Self {
        let part = cycle_partition(g, threshold);
        let long = cycles::decompose_even_of(g, part.residual.iter().copied());
        let mut in_h0 = vec![false; g.m()];
        let mut h0 = Vec::new();
        for c in &long {
            for e in c.alternating_class(c.class_of_min_edge()) {
                in_h0[e] = true;
                h0.push(e);
            }
        }
        h0.sort_unstable();
        let m0 = part
            .residual
            .iter()
            .map(|&e| (e, if in_h0[e] { -0.5 } else { 0.5 }))
            .collect();
        HalfData {
            short_cycles: part.short_cycles,
            h0,
            m0,
            audit: OnceLock::new(),
        }
    }

    fn audit(&self, g: &Graph, d: usize) -> HalfAudit {
        *self.audit.get_or_init(|| {
            let edges: Vec<Edge> = self.m0.iter().map(|&(e, _)| g.edges()[e]).collect();
            let w: Vec<f64> = self.m0.iter().map(|&(_, w)| w).collect();
            let ones = vec![1.0; edges.len()];
            HalfAudit {
                degree: d,
                short_cycles: self.short_cycles.len(),
                residual_edges: edges.len(),
                m_norm: edge_weighted_norm(g.n(), &edges, &w),
                residual_lambda1: edge_weighted_lambda_max(g.n(), &edges, &ones),
            }
        })
    }
}

/// Lazily computed deterministic data for one graph in the recursion.
#[derive(Debug, Default)]
struct LevelCache {
    half: OnceLock<HalfData>,
    odd: OnceLock<Result<OddData, FactorError>>,
}

/// The fixed perfect matching `H′` removed at odd degree and the rest `G_1`.
#[derive(Debug)]
struct OddData {
    matching: Vec<usize>,
    g1: Graph,
    /// `G_1` edge index → parent edge index.
    g1_edges: Vec<usize>,
    cache: Box<LevelCache>,
}

/// Reusable sampler for one base graph. The deterministic parts of the
/// top levels (cycle partition, residual choices, removed matching) are
/// computed once and shared by every sample.
#[derive(Debug)]
pub struct FactorSampler {
    base: Arc<Graph>,
    d: usize,
    threshold: Option<usize>,
    audit: bool,
    cache: LevelCache,
}

struct Partial {
    h: Vec<usize>,
    m: Vec<f64>,
}

impl FactorSampler {
    pub fn new(g: &Graph) -> Result<Self, FactorError> {
        Self::from_arc(Arc::new(g.clone()))
    }

    pub fn from_arc(base: Arc<Graph>) -> Result<Self, FactorError> {
        let d = base.regularity().ok_or(FactorError::NotRegular)?;
        if base.bipartition().is_none() {
            return Err(FactorError::NotBipartite);
        }
        Ok(FactorSampler {
            base,
            d,
            threshold: None,
            audit: false,
            cache: LevelCache::default(),
        })
    }

    /// Fixed short-cycle threshold for every level instead of
    /// `2⌈log₂ n⌉`.
    pub fn with_threshold(mut self, threshold: usize) -> Self {
        self.threshold = Some(threshold);
        self
    }

    /// Record a [`HalfAudit`] for every half-factor step.
    pub fn with_audit(mut self, audit: bool) -> Self {
        self.audit = audit;
        self
    }

    pub fn base(&self) -> &Arc<Graph> {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    fn threshold_for(&self, n: usize) -> usize {
        self.threshold.unwrap_or_else(|| default_threshold(n))
    }

    /// One draw from the recursive `a`-factor distribution.
    pub fn sample(&self, a: usize, rng: &mut Stream) -> Result<FactorSample, FactorError> {
        if a > self.d {
            return Err(FactorError::DegreeOutOfRange { a, d: self.d });
        }
        let mut audits = Vec::new();
        let p = self.rec(&self.base, self.d, a, Some(&self.cache), rng, &mut audits)?;
        let mut h = p.h;
        h.sort_unstable();
        Ok(FactorSample {
            base: Arc::clone(&self.base),
            d: self.d,
            a,
            h_edges: h,
            m_weights: p.m,
            half_audits: audits,
        })
    }

    /// One draw from the half-factor distribution (`a = d/2`).
    pub fn sample_half(&self, rng: &mut Stream) -> Result<FactorSample, FactorError> {
        if self.d % 2 == 1 {
            return Err(FactorError::OddDegree(self.d));
        }
        let mut audits = Vec::new();
        let p = self.half(&self.base, self.d, Some(&self.cache), rng, &mut audits);
        let mut h = p.h;
        h.sort_unstable();
        Ok(FactorSample {
            base: Arc::clone(&self.base),
            d: self.d,
            a: self.d / 2,
            h_edges: h,
            m_weights: p.m,
            half_audits: audits,
        })
    }

    fn rec(
        &self,
        g: &Graph,
        d: usize,
        a: usize,
        cache: Option<&LevelCache>,
        rng: &mut Stream,
        audits: &mut Vec<HalfAudit>,
    ) -> Result<Partial, FactorError> {
        let m = g.m();
        if a == 0 || d == 0 {
            return Ok(Partial { h: Vec::new(), m: vec![0.0; m] });
        }
        if d == 1 {
            return Ok(Partial { h: (0..m).collect(), m: vec![0.0; m] });
        }
        if 2 * a > d {
            let inner = self.rec(g, d, d - a, cache, rng, audits)?;
            let mut taken = vec![false; m];
            for &e in &inner.h {
                taken[e] = true;
            }
            return Ok(Partial {
                h: (0..m).filter(|&e| !taken[e]).collect(),
                m: inner.m.iter().map(|w| -w).collect(),
            });
        }
        if d % 2 == 0 {
            let first = self.half(g, d, cache, rng, audits);
            let mut ids = first.h.clone();
            ids.sort_unstable();
            let h1 = g.spanning_subgraph(&ids);
            let mut child = fork(rng);
            let inner = self.rec(&h1, d / 2, a, None, &mut child, audits)?;
            let scale = 2.0 * a as f64 / d as f64;
            let mut mw: Vec<f64> = first.m.iter().map(|w| scale * w).collect();
            for (local, &w) in inner.m.iter().enumerate() {
                mw[ids[local]] += w;
            }
            return Ok(Partial {
                h: inner.h.iter().map(|&e| ids[e]).collect(),
                m: mw,
            });
        }
        let owned;
        let odd = match cache {
            Some(c) => c.odd.get_or_init(|| OddData::build(g)).as_ref().map_err(Clone::clone)?,
            None => {
                owned = OddData::build(g)?;
                &owned
            }
        };
        let mut child = fork(rng);
        let sub_cache = cache.map(|_| odd.cache.as_ref());
        let inner = self.rec(&odd.g1, d - 1, a, sub_cache, &mut child, audits)?;
        let (af, df) = (a as f64, d as f64);
        let mut mw = vec![0.0; m];
        for &e in &odd.matching {
            mw[e] = af / df;
        }
        let g1_weight = -af / (df * (df - 1.0));
        for (local, &parent) in odd.g1_edges.iter().enumerate() {
            mw[parent] = g1_weight + inner.m[local];
        }
        Ok(Partial {
            h: inner.h.iter().map(|&e| odd.g1_edges[e]).collect(),
            m: mw,
        })
    }

    fn half(
        &self,
        g: &Graph,
        d: usize,
        cache: Option<&LevelCache>,
        rng: &mut Stream,
        audits: &mut Vec<HalfAudit>,
    ) -> Partial {
        let threshold = self.threshold_for(g.n());
        let owned;
        let data = match cache {
            Some(c) => c.half.get_or_init(|| HalfData::build(g, threshold)),
            None => {
                owned = HalfData::build(g, threshold);
                &owned
            }
        };
        let mut h = data.h0.clone();
        for c in &data.short_cycles {
            let class = usize::from(rng.gen::<bool>());
            h.extend(c.alternating_class(class));
        }
        let mut m = vec![0.0; g.m()];
        for &(e, w) in &data.m0 {
            m[e] = w;
        }
        if self.audit {
            audits.push(data.audit(g, d));
        }
        Partial { h, m }
    }
}

impl OddData {
    fn build(g: &Graph) -> Result<Self, FactorError> {
        let matching = find_perfect_matching(g)?;
        let mut in_matching = vec![false; g.m()];
        for &e in &matching {
            in_matching[e] = true;
        }
        let g1_edges: Vec<usize> = (0..g.m()).filter(|&e| !in_matching[e]).collect();
        let g1 = g.spanning_subgraph(&g1_edges);
        Ok(OddData {
            matching,
            g1,
            g1_edges,
            cache: Box::default(),
        })
    }
}

/// One half-factor sample of a `d`-regular bipartite graph with even `d`.
pub fn sample_half_factor(g: &Graph, rng: &mut Stream) -> Result<FactorSample, FactorError> {
    let s = FactorSampler::new(g)?;
    s.sample_half(rng)
}

/// One `a`-factor sample of a `d`-regular bipartite graph.
pub fn sample_a_factor(g: &Graph, a: usize, rng: &mut Stream) -> Result<FactorSample, FactorError> {
    FactorSampler::new(g)?.sample(a, rng)
}
