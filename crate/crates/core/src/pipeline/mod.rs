//! Matrix triples, seed graphs and the iterated construction.

mod seed;
mod triple;

use crate::graph::Graph;
use crate::lifts::{increment_multiplicity, paper_lift_count, FactorSearch, IncrementCertificate, IncrementConfig, LiftError, LiftMode};
use crate::report::Section;
use crate::rng::{fork, Stream};
use crate::spectral::{eigen_sym, SpectralSummary};

pub use seed::{seed_graph, seed_size, SeedError};
pub use triple::{
    bipartite_triple, integer_triple, surd_strict_range, surd_triple, twelve_sqrt_ceil, validate, validate_triple, Family,
    MatrixTriple, TripleError, TripleReport, MEMBER_TOL,
};

/// Stage graphs must keep `λ_1(M)` as top eigenvalue to this accuracy.
pub const TOP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineMode {
    Paper { cap: usize },
    /// Lift counts per stage; the last entry repeats.
    Relaxed { t_schedule: Vec<usize> },
}

impl PipelineMode {
    fn stage_mode(&self, stage: usize) -> LiftMode {
        match self {
            PipelineMode::Paper { cap } => LiftMode::Paper { cap: *cap },
            PipelineMode::Relaxed { t_schedule } => {
                let t = t_schedule.get(stage).or(t_schedule.last()).copied().unwrap_or(1);
                LiftMode::Relaxed { t }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub mode: PipelineMode,
    pub signing_budget: usize,
    pub factor_search: FactorSearch,
    pub dense_cap: usize,
    pub exact_cap: usize,
    /// Run relaxed mode even when the triple fails the feasibility test.
    pub allow_nonmember: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let inc = IncrementConfig::default();
        PipelineConfig {
            mode: PipelineMode::Relaxed { t_schedule: vec![1] },
            signing_budget: inc.signing_budget,
            factor_search: inc.factor_search,
            dense_cap: inc.dense_cap,
            exact_cap: inc.exact_cap,
            allow_nonmember: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub index: usize,
    pub t: usize,
    pub n_before: usize,
    pub graph: Graph,
    pub certificate: IncrementCertificate,
    /// `λ_1(A_G) = λ_1(M)` within [`TOP_TOL`].
    pub top_ok: bool,
    /// Degree check when `M` has constant row sums.
    pub regular: Option<bool>,
    /// `n_{i+1} ≤ 4 n_i^9`.
    pub growth_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Halt {
    /// 1-based stage that stopped the run.
    pub stage: usize,
    pub infeasible: bool,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub triple_report: TripleReport,
    pub seed_n: usize,
    /// Absent when the seed exceeds the dense cap.
    pub seed: Option<Graph>,
    pub seed_summary: Option<SpectralSummary>,
    /// How the seed spectrum was obtained.
    pub seed_spectrum: &'static str,
    pub stages: Vec<Stage>,
    pub halt: Option<Halt>,
}

impl PipelineRun {
    /// Every requested stage ran and certified success.
    pub fn success(&self) -> bool {
        self.halt.is_none() && self.stages.iter().all(|s| s.certificate.success && s.top_ok && s.regular != Some(false))
    }

    pub fn final_graph(&self) -> Option<&Graph> {
        self.stages.last().map(|s| &s.graph).or(self.seed.as_ref())
    }

    pub fn summary_section(&self) -> Section {
        let mut s = Section::new("run");
        s.push("success", self.success())
            .push("member", self.triple_report.member)
            .push("margin", self.triple_report.margin)
            .push("seed_n", self.seed_n)
            .push("seed_spectrum", self.seed_spectrum)
            .push("stages", self.stages.len())
            .push("stage_sizes", self.stages.iter().map(|st| st.graph.n()).collect::<Vec<_>>())
            .push(
                "stage_success",
                self.stages.iter().map(|st| st.certificate.success).collect::<Vec<_>>(),
            )
            .push(
                "success_rate",
                if self.stages.is_empty() {
                    1.0
                } else {
                    self.stages.iter().filter(|st| st.certificate.success).count() as f64 / self.stages.len() as f64
                },
            );
        match &self.halt {
            Some(h) => {
                s.push("halted", true)
                    .push("halt_stage", h.stage)
                    .push("halt_infeasible", h.infeasible)
                    .push("halt_reason", h.reason.as_str());
            }
            None => {
                s.push("halted", false);
            }
        }
        s
    }
}

impl Stage {
    pub fn section(&self, name: &str) -> Section {
        let mut s = Section::new(name);
        s.push("index", self.index)
            .push("t", self.t)
            .push("n_before", self.n_before)
            .push("n_after", self.graph.n())
            .push("top_ok", self.top_ok)
            .push("growth_ok", self.growth_ok);
        if let Some(r) = self.regular {
            s.push("regular", r);
        }
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Triple(#[from] TripleError),
    #[error(transparent)]
    Seed(#[from] SeedError),
    #[error("triple is not in the feasible set (margin {0}); relaxed mode needs an explicit override")]
    NotMember(f64),
    #[error(transparent)]
    Lift(#[from] LiftError),
}

/// Closed-form spectrum of `K_{d,d}`: `{d, 0^{2d−2}, −d}`.
fn complete_bipartite_spectrum(d: usize) -> SpectralSummary {
    let mut values = vec![0.0; 2 * d];
    values[0] = d as f64;
    values[2 * d - 1] = -(d as f64);
    SpectralSummary::from_eigenvalues(values, 1e-9 * d as f64)
}

/// Starting from the seed graph, applies `iterations` increments. A stage
/// whose certificate fails, or that cannot run, ends the run with the stages
/// completed so far.
pub fn run_pipeline(
    triple: &MatrixTriple,
    iterations: usize,
    cfg: &PipelineConfig,
    rng: &mut Stream,
) -> Result<PipelineRun, PipelineError> {
    let report = validate(triple)?;
    if !report.member && iterations > 0 {
        let relaxed = matches!(cfg.mode, PipelineMode::Relaxed { .. });
        if !(relaxed && cfg.allow_nonmember) {
            return Err(PipelineError::NotMember(report.margin));
        }
    }
    let seed_n = seed_size(triple)?;
    let mut run = PipelineRun {
        triple_report: report,
        seed_n,
        seed: None,
        seed_summary: None,
        seed_spectrum: "skipped",
        stages: Vec::new(),
        halt: None,
    };
    if seed_n > cfg.dense_cap {
        if let Family::Integer { d, .. } = triple.family {
            run.seed_summary = Some(complete_bipartite_spectrum(d as usize));
            run.seed_spectrum = "closed-form";
        }
        if iterations > 0 {
            let (infeasible, reason) = match cfg.mode {
                PipelineMode::Paper { cap } => {
                    let t = paper_lift_count(seed_n);
                    let err = LiftError::Infeasible {
                        n: seed_n,
                        t,
                        log2_size: (seed_n as f64).log2() + t as f64 + 1.0,
                        cap,
                    };
                    (true, err.to_string())
                }
                PipelineMode::Relaxed { .. } => (
                    true,
                    format!("seed has {seed_n} vertices, above the dense cap {}", cfg.dense_cap),
                ),
            };
            run.halt = Some(Halt {
                stage: 1,
                infeasible,
                reason,
            });
        }
        return Ok(run);
    }
    let seed = seed_graph(triple)?;
    run.seed_summary = Some(eigen_sym(&seed.adjacency_matrix(), None).map_err(LiftError::from)?);
    run.seed_spectrum = "dense";
    let lambda1_m = triple.lambda1_m();
    let row_sum = triple
        .has_constant_row_sums()
        .then(|| triple.m.row(0).iter().sum::<i64>() as usize);
    let mut current = seed.clone();
    run.seed = Some(seed);
    for index in 1..=iterations {
        let mode = cfg.mode.stage_mode(index - 1);
        let inc = IncrementConfig {
            mode,
            signing_budget: cfg.signing_budget,
            factor_search: cfg.factor_search,
            dense_cap: cfg.dense_cap,
            exact_cap: cfg.exact_cap,
        };
        let mut stage_rng = fork(rng);
        let (graph, certificate) = match increment_multiplicity(&current, triple, &inc, &mut stage_rng) {
            Ok(out) => out,
            Err(e) => {
                run.halt = Some(Halt {
                    stage: index,
                    infeasible: matches!(e, LiftError::Infeasible { .. }),
                    reason: e.to_string(),
                });
                break;
            }
        };
        let n_before = current.n();
        let top = certificate.after.lambda(1).unwrap_or(f64::NAN);
        let stage = Stage {
            index,
            t: certificate.lift_steps,
            n_before,
            top_ok: (top - lambda1_m).abs() <= TOP_TOL * lambda1_m.max(1.0),
            regular: row_sum.map(|r| graph.regularity() == Some(r)),
            growth_ok: (graph.n() as f64) <= 4.0 * (n_before as f64).powi(9),
            graph,
            certificate,
        };
        let ok = stage.certificate.success && stage.top_ok && stage.regular != Some(false);
        current = stage.graph.clone();
        run.stages.push(stage);
        if !ok {
            let c = &run.stages.last().unwrap().certificate;
            run.halt = Some(Halt {
                stage: index,
                infeasible: false,
                reason: format!(
                    "signing top eigenvalue {} against target {} (gap {}), multiplicity {} -> {}",
                    c.signing_lambda1,
                    c.target,
                    c.signing_lambda1 - c.target,
                    c.multiplicity_before,
                    c.multiplicity_after
                ),
            });
            break;
        }
    }
    Ok(run)
}
