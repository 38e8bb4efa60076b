//! The multiplicity-incrementing lift.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;

use super::{ramanujan_lift_iterate, signing_from_factors, LiftError, LiftStep};
use crate::factors::{select_with_compression, FactorSampler};
use crate::graph::{check_graph_lift, two_lift, Graph, Signing};
use crate::pipeline::MatrixTriple;
use crate::report::{Section, Value};
use crate::rng::{fork, Stream};
use crate::spectral::{
    certify_multiplicity, certify_by_conjugate_pairs, eigen_sym, eigh, SpectralError, SpectralSummary, SpectralTarget,
};

/// Slack when comparing numeric eigenvalues against the target.
const TARGET_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftMode {
    /// `t` is the least integer with `2^t > n^8`; aborts past `cap` vertices.
    Paper { cap: usize },
    /// Caller-chosen number of Ramanujan lifts.
    Relaxed { t: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorSearch {
    /// Resample until the compression bound `7√M_ij` holds.
    Concentrated { max_trials: usize },
    /// Try every factor of the single bipartite layer, up to `limit`.
    Exhaustive { limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IncrementConfig {
    pub mode: LiftMode,
    /// Random restarts per layer signing search.
    pub signing_budget: usize,
    pub factor_search: FactorSearch,
    /// Largest lifted graph that is decomposed densely.
    pub dense_cap: usize,
    /// Largest matrix dimension certified by exact elimination.
    pub exact_cap: usize,
}

impl Default for IncrementConfig {
    fn default() -> Self {
        IncrementConfig {
            mode: LiftMode::Relaxed { t: 1 },
            signing_budget: 64,
            factor_search: FactorSearch::Concentrated { max_trials: 256 },
            dense_cap: 4096,
            exact_cap: 256,
        }
    }
}

/// Least `t` with `2^t > n^8`.
pub fn paper_lift_count(n: usize) -> u64 {
    BigUint::from(n.max(1)).pow(8).bits()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorRecord {
    pub i: usize,
    pub j: usize,
    /// `D_ij`.
    pub degree: usize,
    pub trials: usize,
    pub compression: f64,
    pub bound: f64,
}

/// One candidate of an exhaustive factor search.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorOutcome {
    /// Factor edges as vertex pairs.
    pub edges: Vec<(usize, usize)>,
    pub lambda1: f64,
    /// `λ_1(A_G − 2A_H)` equals the target: numerically no larger and the
    /// target's kernel is exactly nontrivial.
    pub equals_target: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactCheck {
    /// Multiplicity of the target in `A_{G_t}`.
    pub base: usize,
    /// Multiplicity of the target in `A_s`.
    pub signing: usize,
    pub method: &'static str,
    /// Whether `base + signing` equals the numeric multiplicity after the lift.
    pub agrees: bool,
}

#[derive(Debug, Clone)]
pub struct IncrementCertificate {
    pub before: SpectralSummary,
    pub after: SpectralSummary,
    pub target: f64,
    pub multiplicity_before: usize,
    pub multiplicity_after: usize,
    pub signing_lambda1: f64,
    pub lift_steps: usize,
    pub lifted_n: usize,
    pub sigma: f64,
    pub subspace_dim: usize,
    pub ramanujan: Vec<LiftStep>,
    pub factors: Vec<FactorRecord>,
    pub exhaustive: Option<Vec<FactorOutcome>>,
    pub exact: Option<ExactCheck>,
    pub exact_note: Option<String>,
    pub success: bool,
}

impl IncrementCertificate {
    pub fn lambda2_after(&self) -> f64 {
        self.after.lambda(2).unwrap_or(f64::NEG_INFINITY)
    }

    pub fn sections(&self, prefix: &str) -> Vec<Section> {
        let mut s = Section::new(prefix);
        s.push("success", self.success)
            .push("target", self.target)
            .push("multiplicity_before", self.multiplicity_before)
            .push("multiplicity_after", self.multiplicity_after)
            .push("signing_lambda1", self.signing_lambda1)
            .push("lambda2_after", self.lambda2_after())
            .push("lift_steps", self.lift_steps)
            .push("lifted_n", self.lifted_n)
            .push("sigma", self.sigma)
            .push("subspace_dim", self.subspace_dim);
        let steps: Vec<Value> = self
            .ramanujan
            .iter()
            .map(|st| Value::Array(vec![st.n_before.into(), st.combined_lambda1.into(), st.combined_bound.into()]))
            .collect();
        s.push("ramanujan_steps", Value::Array(steps));
        let factors: Vec<Value> = self
            .factors
            .iter()
            .map(|f| {
                Value::Array(vec![
                    f.i.into(),
                    f.j.into(),
                    f.degree.into(),
                    f.trials.into(),
                    f.compression.into(),
                    f.bound.into(),
                ])
            })
            .collect();
        s.push("factors", Value::Array(factors));
        match &self.exact {
            Some(e) => {
                s.push("exact_method", e.method)
                    .push("exact_base", e.base)
                    .push("exact_signing", e.signing)
                    .push("exact_agrees", e.agrees);
            }
            None => {
                s.push("exact_method", "none");
            }
        }
        if let Some(note) = &self.exact_note {
            s.push("exact_note", note.as_str());
        }
        let mut out = vec![s, self.before.to_section(&format!("{prefix}.before")), self.after.to_section(&format!("{prefix}.after"))];
        if let Some(list) = &self.exhaustive {
            let mut ex = Section::new(&format!("{prefix}.exhaustive"));
            ex.push("count", list.len())
                .push("lambda1", list.iter().map(|o| o.lambda1).collect::<Vec<_>>())
                .push("equals_target", list.iter().map(|o| o.equals_target).collect::<Vec<_>>());
            out.push(ex);
        }
        out
    }
}

/// Orthonormal basis of the span of eigenvectors with eigenvalue above
/// `sigma`, after projecting away the part-constant vectors.
pub(crate) fn large_eigen_subspace(g: &Graph, values: &[f64], vectors: &DMatrix<f64>, sigma: f64) -> DMatrix<f64> {
    let n = g.n();
    let parts = g.parts().expect("graph lift carries parts");
    let k = g.num_parts();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for p in 0..k {
        let size = parts.iter().filter(|&&x| x == p).count();
        if size > 0 {
            let scale = 1.0 / (size as f64).sqrt();
            basis.push(DVector::from_fn(n, |v, _| if parts[v] == p { scale } else { 0.0 }));
        }
    }
    let fixed = basis.len();
    for (c, &mu) in values.iter().enumerate() {
        if mu <= sigma + TARGET_TOL {
            continue;
        }
        let mut r: DVector<f64> = vectors.column(c).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let dot = b.dot(&r);
                r.axpy(-dot, b, 1.0);
            }
        }
        let norm = r.norm();
        if norm >= 1e-8 {
            basis.push(r / norm);
        }
    }
    let cols = &basis[fixed..];
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

fn multiplicity_exact(
    a: &crate::spectral::exact::IntMatrix,
    target: SpectralTarget,
    summary: &SpectralSummary,
) -> Result<(usize, &'static str), SpectralError> {
    match certify_multiplicity(a, target, summary) {
        Ok(m) => Ok((m, "kernel")),
        Err(SpectralError::ConjugateGuard { .. }) => Ok((certify_by_conjugate_pairs(a, target)?, "conjugate-pairs")),
        Err(e) => Err(e),
    }
}

/// Performs the Ramanujan lifts, picks factors on every layer, assembles the
/// `M′`-signing and returns its 2-lift with a certificate.
pub fn increment_multiplicity(
    g: &Graph,
    triple: &MatrixTriple,
    cfg: &IncrementConfig,
    rng: &mut Stream,
) -> Result<(Graph, IncrementCertificate), LiftError> {
    if !check_graph_lift(g, &triple.m)? {
        return Err(LiftError::NotGraphLift);
    }
    let target = triple.lambda1_mp();
    let n = g.n();
    let t = match cfg.mode {
        LiftMode::Relaxed { t } => t,
        LiftMode::Paper { cap } => {
            let t = paper_lift_count(n);
            let log2_size = (n as f64).log2() + t as f64 + 1.0;
            if t >= 64 || (n as u128) << (t + 1) > cap as u128 {
                return Err(LiftError::Infeasible { n, t, log2_size, cap });
            }
            t as usize
        }
    };
    let lifted_n = n << (t + 1);
    if lifted_n > cfg.dense_cap {
        return Err(LiftError::Infeasible {
            n,
            t: t as u64,
            log2_size: (lifted_n as f64).log2(),
            cap: cfg.dense_cap,
        });
    }
    let before = eigen_sym(&g.adjacency_matrix(), None)?;
    let lambda2 = before.lambda(2).unwrap_or(f64::NEG_INFINITY);
    if lambda2 > target + TARGET_TOL {
        return Err(LiftError::Precondition { lambda2, target });
    }
    let mut lift_rng = fork(rng);
    let chain = ramanujan_lift_iterate(g, t, cfg.signing_budget, &mut lift_rng)?;
    let gt = chain.graph;
    let eig_t = eigh(&gt.adjacency_matrix())?;
    let sigma = triple.sigma();
    let basis = large_eigen_subspace(&gt, &eig_t.values, &eig_t.vectors, sigma);

    let d = triple.d_matrix();
    let k = triple.k();
    let mut factor_rng = fork(rng);
    let mut factors = Vec::new();
    let mut records = Vec::new();
    let mut exhaustive = None;
    for i in 0..k {
        for j in i + 1..k {
            let mij = triple.m.get(i, j);
            if mij == 0 {
                continue;
            }
            let dij = d.get(i, j) as usize;
            let layer = gt.part_pair(i, j);
            let local: Vec<usize> = if dij == 0 {
                Vec::new()
            } else if dij as i64 == mij {
                (0..layer.graph.m()).collect()
            } else {
                match cfg.factor_search {
                    FactorSearch::Concentrated { max_trials } => {
                        let sampler = FactorSampler::new(&layer.graph)?;
                        let rows = basis.select_rows(layer.vertices.iter());
                        let sel = select_with_compression(&sampler, dij, &rows, max_trials, &mut factor_rng)?;
                        records.push(FactorRecord {
                            i,
                            j,
                            degree: dij,
                            trials: sel.trials,
                            compression: sel.value,
                            bound: sel.bound,
                        });
                        sel.sample.h_edges
                    }
                    FactorSearch::Exhaustive { limit } => {
                        let (chosen, outcomes) = exhaustive_layer(&gt, triple, &layer, (i, j), dij, limit, target)?;
                        exhaustive = Some(outcomes);
                        chosen
                    }
                }
            };
            factors.push(((i, j), local.iter().map(|&e| layer.edge_ids[e]).collect::<Vec<_>>()));
        }
    }
    let signing = signing_from_factors(&gt, triple, &factors)?;
    let s_summary = eigen_sym(&signing.signed_adjacency(), None)?;
    let signing_lambda1 = s_summary.lambda(1).unwrap_or(0.0);
    let lifted = two_lift(&signing);
    let after = eigen_sym(&lifted.adjacency_matrix(), None)?;
    let multiplicity_before = before.multiplicity_of(target);
    let multiplicity_after = after.multiplicity_of(target);

    let base_summary = SpectralSummary::from_eigenvalues(eig_t.values.clone(), before.tol);
    let (exact, exact_note) = match triple.target() {
        Some(tg) if gt.n() <= cfg.exact_cap => {
            let base = multiplicity_exact(&gt.adjacency_int(), tg, &base_summary)?;
            let signed = multiplicity_exact(&signing.signed_adjacency_int(), tg, &s_summary)?;
            let method = if base.1 == "kernel" && signed.1 == "kernel" { "kernel" } else { "conjugate-pairs" };
            (
                Some(ExactCheck {
                    base: base.0,
                    signing: signed.0,
                    method,
                    agrees: base.0 + signed.0 == multiplicity_after,
                }),
                None,
            )
        }
        Some(_) => (None, Some(format!("skipped: {} vertices exceed exact cap {}", gt.n(), cfg.exact_cap))),
        None => (None, Some("target has no exact description".to_string())),
    };
    let success = signing_lambda1 <= target + TARGET_TOL
        && multiplicity_after > multiplicity_before
        && exact.as_ref().is_none_or(|e| e.agrees);
    let cert = IncrementCertificate {
        before,
        after,
        target,
        multiplicity_before,
        multiplicity_after,
        signing_lambda1,
        lift_steps: t,
        lifted_n: lifted.n(),
        sigma,
        subspace_dim: basis.ncols(),
        ramanujan: chain.steps,
        factors: records,
        exhaustive,
        exact,
        exact_note,
        success,
    };
    Ok((lifted, cert))
}

/// Tries every `D_ij`-factor of one layer; returns the first whose signing
/// attains exactly the target (or the one with the smallest `λ_1`).
fn exhaustive_layer(
    gt: &Graph,
    triple: &MatrixTriple,
    layer: &crate::graph::PartPair,
    pair: (usize, usize),
    dij: usize,
    limit: usize,
    target: f64,
) -> Result<(Vec<usize>, Vec<FactorOutcome>), LiftError> {
    let all = super::enumerate_factors(&layer.graph, dij, limit);
    let tg = triple.target();
    let mut outcomes = Vec::with_capacity(all.len());
    let mut chosen: Option<usize> = None;
    let mut best: Option<(f64, usize)> = None;
    for (idx, local) in all.iter().enumerate() {
        let global: Vec<usize> = local.iter().map(|&e| layer.edge_ids[e]).collect();
        let mut signs = vec![1i8; gt.m()];
        for &e in &global {
            signs[e] = -1;
        }
        let s = Signing::new(gt.clone(), signs)?;
        let summary = eigen_sym(&s.signed_adjacency(), None)?;
        let lambda1 = summary.lambda(1).unwrap_or(0.0);
        let equals_target = lambda1 <= target + TARGET_TOL
            && match tg {
                Some(t) => multiplicity_exact(&s.signed_adjacency_int(), t, &summary)?.0 >= 1,
                None => (lambda1 - target).abs() <= TARGET_TOL,
            };
        if equals_target && chosen.is_none() {
            chosen = Some(idx);
        }
        if best.is_none_or(|(b, _)| lambda1 < b) {
            best = Some((lambda1, idx));
        }
        outcomes.push(FactorOutcome {
            edges: global.iter().map(|&e| gt.edges()[e]).collect(),
            lambda1,
            equals_target,
        });
    }
    let pick = chosen.or(best.map(|b| b.1)).ok_or(LiftError::FactorDegree {
        i: pair.0,
        j: pair.1,
        want: dij as i64,
    })?;
    Ok((all[pick].clone(), outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::complete_bipartite;
    use crate::pipeline::bipartite_triple;
    use crate::rng::substream;

    #[test]
    fn paper_lift_count_values() {
        assert_eq!(paper_lift_count(1), 1);
        assert_eq!(paper_lift_count(2), 9);
        assert_eq!(paper_lift_count(16), 33);
    }

    #[test]
    fn k44_exhaustive_increment() {
        let tr = bipartite_triple(4, 1).unwrap();
        let g = complete_bipartite(4, 4);
        let cfg = IncrementConfig {
            mode: LiftMode::Relaxed { t: 0 },
            factor_search: FactorSearch::Exhaustive { limit: 1000 },
            ..IncrementConfig::default()
        };
        let (lifted, cert) = increment_multiplicity(&g, &tr, &cfg, &mut substream(0, 0)).unwrap();
        assert_eq!(lifted.n(), 16);
        let ex = cert.exhaustive.as_ref().unwrap();
        assert_eq!(ex.len(), 24);
        assert!(ex.iter().all(|o| o.equals_target));
        assert!(cert.success);
        assert_eq!(cert.multiplicity_before, 0);
        assert_eq!(cert.multiplicity_after, 4);
        assert_eq!(cert.exact.as_ref().unwrap().signing, 4);
    }

    #[test]
    fn paper_mode_hits_the_cap() {
        let tr = bipartite_triple(4, 1).unwrap();
        let g = complete_bipartite(4, 4);
        let cfg = IncrementConfig {
            mode: LiftMode::Paper { cap: 1_000_000 },
            ..IncrementConfig::default()
        };
        assert!(matches!(
            increment_multiplicity(&g, &tr, &cfg, &mut substream(0, 0)),
            Err(LiftError::Infeasible { t: 25, .. })
        ));
    }
}
