//! Batch commands. Every command writes `manifest.toml` plus its artifacts
//! into `--out`; rerunning a manifest reproduces the artifacts byte for byte
//! whatever the thread count.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rand::Rng;

use crate::equiangular::{
    describe, ensemble_for_size, extract_lines, parse_lines, verify_line_system, write_gram, write_lines,
};
use crate::factors::{c_bound, concentration_stats, FactorSampler};
use crate::graph::{families, parse_edge_list, write_edge_list, Graph};
use crate::lifts::{ramanujan_lift_iterate, FactorSearch};
use crate::pipeline::{
    bipartite_triple, integer_triple, run_pipeline, surd_triple, validate, MatrixTriple, PipelineConfig, PipelineMode,
};
use crate::report::{Report, Section, Value};
use crate::rng::{derive_seed, substream};
use crate::spectral::eigen_sym;
use crate::spectral::exact::IntMatrix;

pub const MANIFEST: &str = "manifest.toml";

/// Exit status when a command ran but a certificate or check failed.
pub const EXIT_FAILED_CHECK: u8 = 1;
/// Exit status for invalid input or a violated precondition.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "eqlines", version, about = "Second-eigenvalue multiplicity constructions and equiangular lines")]
pub struct Cli {
    /// Worker threads (default: available cores). Never changes outputs.
    #[arg(long, global = true)]
    pub parallel: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a standard graph to an edge-list file.
    Generate(GenerateArgs),
    /// Sample a-factors of a regular bipartite graph and audit them.
    SampleFactor(SampleFactorArgs),
    /// Empirical tail of the bilinear concentration statistic.
    Concentration(ConcentrationArgs),
    /// Iterated Ramanujan 2-lifts.
    Lift(LiftArgs),
    /// Feasibility check and the iterated multiplicity construction.
    Pipeline(PipelineArgs),
    /// Gram matrix and equiangular lines from a regular graph.
    Lines(LinesArgs),
    /// Re-read a line-system file and verify it.
    Verify(VerifyArgs),
    /// Rerun the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyName {
    Cycle,
    Complete,
    CompleteBipartite,
    Petersen,
    CirculantBipartite,
    RandomBipartite,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    /// Vertex count (cycle, complete) or side size (bipartite families).
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    /// Degree for the bipartite circulant and random families.
    #[arg(long, default_value_t = 0)]
    pub d: usize,
    /// Disjoint copies.
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleFactorArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub a: usize,
    #[arg(long)]
    pub seed: u64,
    /// Sample `i` uses substream `i` of the seed.
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// Short-cycle threshold (default `max(3, 2⌈log₂ n⌉)`).
    #[arg(long)]
    pub threshold: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConcentrationArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub a: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 3.0])]
    pub t: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub seed: u64,
    /// Random restarts per signing search.
    #[arg(long, default_value_t = 64)]
    pub budget: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    Paper,
    Relaxed,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Integer family: `d=<d>` and optionally `a=<a>` (default `⌈12√d⌉`).
    #[arg(long = "int", num_args = 1.., value_name = "KEY=VALUE", conflicts_with_all = ["surd", "matrices"])]
    pub int: Option<Vec<String>>,
    /// Surd family: `t=<t> u=<u>`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE", conflicts_with = "matrices")]
    pub surd: Option<Vec<String>>,
    /// TOML file with `m`, `m_prime` and `beta`.
    #[arg(long)]
    pub matrices: Option<PathBuf>,
    /// Require the lemma's parameter range for the surd family.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, value_enum, default_value_t = ModeName::Relaxed)]
    pub mode: ModeName,
    /// Shorthand for `--mode paper`.
    #[arg(long, conflicts_with = "relaxed")]
    pub paper: bool,
    /// Shorthand for `--mode relaxed`.
    #[arg(long)]
    pub relaxed: bool,
    /// Only evaluate the feasibility inequality.
    #[arg(long)]
    pub validate_only: bool,
    #[arg(long, default_value_t = 1)]
    pub iters: usize,
    /// Lift counts per stage in relaxed mode; the last entry repeats.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize])]
    pub t_schedule: Vec<usize>,
    /// Random restarts per signing search.
    #[arg(long, default_value_t = 64)]
    pub budget: usize,
    /// Factor resamples per layer.
    #[arg(long, default_value_t = 256)]
    pub factor_trials: usize,
    /// Vertex cap in paper mode.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
    /// Largest graph decomposed densely.
    #[arg(long, default_value_t = 4096)]
    pub dense_cap: usize,
    /// Largest graph certified by exact elimination.
    #[arg(long, default_value_t = 256)]
    pub exact_cap: usize,
    /// Run relaxed mode on triples outside the feasible set.
    #[arg(long)]
    pub allow_nonmember: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LinesArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub lambda: f64,
    /// Number of lines; doubles the graph by Ramanujan lifts when `ell ≥ 2n`.
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub budget: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub lines: PathBuf,
    /// Write `report.toml` and a manifest here instead of printing.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// Outcome of a command: files written and whether every check passed.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<String>,
    pub success: bool,
}

struct OutDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, argv: &[String], command: &str, params: Section, success: bool) -> Result<Outcome> {
        let mut top = Section::new("");
        top.push("command", command)
            .push("version", env!("CARGO_PKG_VERSION"))
            .push("argv", argv.to_vec())
            .push("outputs", self.files.clone())
            .push("success", success);
        let mut report = Report::new();
        report.add(top).add(params.renamed("parameters"));
        self.write(MANIFEST, &report.render())?;
        Ok(Outcome {
            files: self.files,
            success,
        })
    }
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Arguments with `--out` and `--parallel` removed: the part of the command
/// line that determines the outputs.
pub fn normalized_argv(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args.iter().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" || a == "--parallel" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") || a.starts_with("--parallel=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

/// Parses the command line, runs it, and maps the outcome to an exit code.
pub fn main_with_args(args: Vec<String>) -> u8 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { 0 };
        }
    };
    let argv = normalized_argv(&args);
    match run(cli, &argv) {
        Ok(o) if o.success => 0,
        Ok(_) => EXIT_FAILED_CHECK,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

pub fn run(cli: Cli, argv: &[String]) -> Result<Outcome> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(p) = cli.parallel {
        builder = builder.num_threads(p.max(1));
    }
    let pool = builder.build().context("building thread pool")?;
    pool.install(|| dispatch(cli.command, argv))
}

fn dispatch(command: Command, argv: &[String]) -> Result<Outcome> {
    match command {
        Command::Generate(a) => cmd_generate(&a, argv),
        Command::SampleFactor(a) => cmd_sample_factor(&a, argv),
        Command::Concentration(a) => cmd_concentration(&a, argv),
        Command::Lift(a) => cmd_lift(&a, argv),
        Command::Pipeline(a) => cmd_pipeline(&a, argv),
        Command::Lines(a) => cmd_lines(&a, argv),
        Command::Verify(a) => cmd_verify(&a, argv),
        Command::Replay(a) => cmd_replay(&a),
    }
}

fn cmd_generate(args: &GenerateArgs, argv: &[String]) -> Result<Outcome> {
    let one = match args.family {
        FamilyName::Cycle => families::cycle(args.n),
        FamilyName::Complete => families::complete(args.n),
        FamilyName::CompleteBipartite => families::complete_bipartite(args.n, args.n),
        FamilyName::Petersen => families::petersen(),
        FamilyName::CirculantBipartite => families::circulant_bipartite(args.n, args.d),
        FamilyName::RandomBipartite => {
            let seed = args.seed.ok_or_else(|| anyhow!("random-bipartite needs --seed"))?;
            families::random_regular_bipartite(args.n, args.d, &mut substream(seed, 0))
        }
    };
    let g = if args.copies > 1 {
        Graph::disjoint_union(&vec![one; args.copies])
    } else {
        one
    };
    let mut out = OutDir::create(&args.out)?;
    out.write("graph.txt", &write_edge_list(&g))?;
    let mut p = Section::new("parameters");
    p.push("family", format!("{:?}", args.family))
        .push("n", args.n)
        .push("d", args.d)
        .push("copies", args.copies)
        .push("vertices", g.n())
        .push("edges", g.m());
    out.finish(argv, "generate", p, true)
}

fn cmd_sample_factor(args: &SampleFactorArgs, argv: &[String]) -> Result<Outcome> {
    let g = read_graph(&args.graph)?;
    let mut sampler = FactorSampler::new(&g)?.with_audit(true);
    if let Some(l) = args.threshold {
        sampler = sampler.with_threshold(l);
    }
    let d = sampler.degree();
    if args.a > d {
        bail!("a = {} exceeds the degree d = {d}", args.a);
    }
    let mut out = OutDir::create(&args.out)?;
    let mut regular = 0usize;
    let mut max_norm: f64 = 0.0;
    let mut max_half_ratio: f64 = 0.0;
    let mut max_residual_ratio: f64 = 0.0;
    let mut norms = Vec::with_capacity(args.samples);
    for i in 0..args.samples {
        let s = sampler.sample(args.a, &mut substream(args.seed, i as u64))?;
        regular += usize::from(s.is_a_regular());
        let norm = s.m_norm();
        max_norm = max_norm.max(norm);
        norms.push(norm);
        for h in &s.half_audits {
            let dd = h.degree as f64;
            max_half_ratio = max_half_ratio.max(h.m_norm / (2.0 * dd).sqrt());
            max_residual_ratio = max_residual_ratio.max(h.residual_lambda1 / (2.0 * (2.0 * dd).sqrt()));
        }
        out.write(&format!("h_{i:04}.txt"), &write_edge_list(&s.h()))?;
        out.write(&format!("m_{i:04}.txt"), &write_weights(g.n(), g.edges(), &s.m_weights))?;
    }
    let six = 6.0 * (d as f64).sqrt();
    let success = regular == args.samples && max_norm <= six + 1e-9;
    let mut summary = Section::new("summary");
    summary
        .push("samples", args.samples)
        .push("n", g.n())
        .push("d", d)
        .push("a", args.a)
        .push("a_regular", regular)
        .push("max_m_norm", max_norm)
        .push("c_d", if d == 0 { 0.0 } else { c_bound(d) })
        .push("six_sqrt_d", six)
        .push("max_half_norm_ratio", max_half_ratio)
        .push("max_residual_ratio", max_residual_ratio)
        .push("m_norms", norms)
        .push("pass", success);
    let mut report = Report::new();
    report.add(summary);
    out.write("summary.toml", &report.render())?;
    let mut p = Section::new("parameters");
    p.push("graph", args.graph.display().to_string())
        .push("a", args.a)
        .push("seed", args.seed.to_string())
        .push("samples", args.samples)
        .push("threshold", sampler_threshold(args.threshold, g.n()));
    out.finish(argv, "sample-factor", p, success)
}

fn sampler_threshold(given: Option<usize>, n: usize) -> usize {
    given.unwrap_or_else(|| crate::factors::default_threshold(n))
}

/// `n m` header, then `u v w` per edge.
pub fn write_weights(n: usize, edges: &[(usize, usize)], w: &[f64]) -> String {
    let mut out = format!("{n} {}\n", edges.len());
    for (&(u, v), x) in edges.iter().zip(w) {
        out.push_str(&format!("{u} {v} {x}\n"));
    }
    out
}

/// Dense matrix from a weight file.
pub fn parse_weights(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<usize> = lines
        .next()
        .ok_or_else(|| anyhow!("missing header"))?
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    let [n, m] = header[..] else {
        bail!("header must be `n m`");
    };
    let mut mat = DMatrix::zeros(n, n);
    let mut count = 0;
    for line in lines {
        let tok: Vec<&str> = line.split_whitespace().collect();
        let [u, v, w] = tok[..] else {
            bail!("expected `u v w`");
        };
        let (u, v, w): (usize, usize, f64) = (u.parse()?, v.parse()?, w.parse()?);
        if u >= n || v >= n {
            bail!("vertex out of range");
        }
        mat[(u, v)] = w;
        mat[(v, u)] = w;
        count += 1;
    }
    if count != m {
        bail!("header declares {m} edges, found {count}");
    }
    Ok(mat)
}

fn cmd_concentration(args: &ConcentrationArgs, argv: &[String]) -> Result<Outcome> {
    let g = read_graph(&args.graph)?;
    let sampler = FactorSampler::new(&g)?;
    let n = g.n();
    let mut vec_rng = substream(derive_seed(args.seed, 1), 0);
    let scale = 1.0 / (n as f64).sqrt();
    let mut sign_vector = || -> Vec<f64> { (0..n).map(|_| if vec_rng.gen::<bool>() { scale } else { -scale }).collect() };
    let u = sign_vector();
    let v = sign_vector();
    let report = concentration_stats(&sampler, args.a, &u, &v, args.samples, &args.t, &mut substream(args.seed, 0))?;
    let mut out = OutDir::create(&args.out)?;
    let mut r = Report::new();
    r.add(report.to_section("tail"));
    out.write("tail.toml", &r.render())?;
    let mut p = Section::new("parameters");
    p.push("graph", args.graph.display().to_string())
        .push("a", args.a)
        .push("seed", args.seed.to_string())
        .push("samples", args.samples)
        .push("t", args.t.clone())
        .push("vectors", "random signs / sqrt(n)");
    out.finish(argv, "concentration", p, report.within_bound())
}

fn cmd_lift(args: &LiftArgs, argv: &[String]) -> Result<Outcome> {
    let g = read_graph(&args.graph)?;
    let chain = ramanujan_lift_iterate(&g, args.t, args.budget, &mut substream(args.seed, 0))?;
    let mut out = OutDir::create(&args.out)?;
    out.write("lifted.txt", &write_edge_list(&chain.graph))?;
    let mut r = Report::new();
    let mut top = Section::new("lift");
    top.push("n_before", g.n()).push("n_after", chain.graph.n()).push("steps", chain.steps.len());
    r.add(top);
    for (i, step) in chain.steps.iter().enumerate() {
        let mut s = Section::new(&format!("step_{}", i + 1));
        s.push("n_before", step.n_before)
            .push("combined_lambda1", step.combined_lambda1)
            .push("combined_bound", step.combined_bound)
            .push(
                "layers",
                Value::Array(
                    step.layers
                        .iter()
                        .map(|(a, b, c)| {
                            Value::Array(vec![(*a).into(), (*b).into(), c.norm_of_as.into(), c.threshold.into(), c.met.into()])
                        })
                        .collect(),
                ),
            );
        r.add(s);
    }
    out.write("report.toml", &r.render())?;
    let mut p = Section::new("parameters");
    p.push("graph", args.graph.display().to_string())
        .push("t", args.t)
        .push("seed", args.seed.to_string())
        .push("budget", args.budget);
    out.finish(argv, "lift", p, true)
}

fn key_values(items: &[String]) -> Result<Vec<(String, u64)>> {
    items
        .iter()
        .flat_map(|s| s.split(','))
        .filter(|s| !s.is_empty())
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("expected KEY=VALUE, got `{kv}`"))?;
            let v: u64 = v.parse().with_context(|| format!("bad value in `{kv}`"))?;
            Ok((k.to_string(), v))
        })
        .collect()
}

fn lookup(kv: &[(String, u64)], key: &str) -> Option<u64> {
    kv.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
}

fn int_matrix(value: &toml::Value, name: &str) -> Result<IntMatrix> {
    let rows = value.as_array().ok_or_else(|| anyhow!("`{name}` must be an array of rows"))?;
    let rows: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| anyhow!("`{name}` rows must be arrays"))?
                .iter()
                .map(|x| x.as_integer().ok_or_else(|| anyhow!("`{name}` entries must be integers")))
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.iter().any(|r| r.len() != rows.len()) {
        bail!("`{name}` must be square");
    }
    Ok(IntMatrix::from_rows(&rows))
}

/// The triple described by `--int`, `--surd` or `--matrices`.
pub fn parse_triple(args: &PipelineArgs) -> Result<MatrixTriple> {
    if let Some(items) = &args.int {
        let kv = key_values(items)?;
        let d = lookup(&kv, "d").ok_or_else(|| anyhow!("--int needs d=<d>"))?;
        return Ok(match lookup(&kv, "a") {
            Some(a) => bipartite_triple(d, a)?,
            None => integer_triple(d)?,
        });
    }
    if let Some(items) = &args.surd {
        let kv = key_values(items)?;
        let t = lookup(&kv, "t").ok_or_else(|| anyhow!("--surd needs t=<t>"))?;
        let u = lookup(&kv, "u").ok_or_else(|| anyhow!("--surd needs u=<u>"))?;
        return Ok(surd_triple(t, u, args.strict)?);
    }
    if let Some(path) = &args.matrices {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let table: toml::Table = text.parse()?;
        let m = int_matrix(table.get("m").ok_or_else(|| anyhow!("missing `m`"))?, "m")?;
        let mp = int_matrix(table.get("m_prime").ok_or_else(|| anyhow!("missing `m_prime`"))?, "m_prime")?;
        let beta = table
            .get("beta")
            .and_then(|b| b.as_float().or_else(|| b.as_integer().map(|i| i as f64)))
            .ok_or_else(|| anyhow!("missing `beta`"))?;
        return Ok(MatrixTriple::new(m, mp, beta)?);
    }
    bail!("one of --int, --surd or --matrices is required")
}

fn cmd_pipeline(args: &PipelineArgs, argv: &[String]) -> Result<Outcome> {
    let triple = parse_triple(args)?;
    let verdict = validate(&triple)?;
    let mode = if args.paper {
        ModeName::Paper
    } else if args.relaxed {
        ModeName::Relaxed
    } else {
        args.mode
    };
    let mut out = OutDir::create(&args.out)?;
    let mut report = Report::new();
    report
        .add(triple.to_section("triple"))
        .add(verdict.to_section("validation"));
    let mut p = Section::new("parameters");
    p.push("mode", format!("{mode:?}").to_lowercase())
        .push("strict", args.strict)
        .push("validate_only", args.validate_only)
        .push("iters", args.iters)
        .push("t_schedule", args.t_schedule.clone())
        .push("budget", args.budget)
        .push("factor_trials", args.factor_trials)
        .push("cap", args.cap)
        .push("dense_cap", args.dense_cap)
        .push("exact_cap", args.exact_cap)
        .push("allow_nonmember", args.allow_nonmember)
        .push("seed", args.seed.to_string());
    if args.validate_only {
        out.write("report.toml", &report.render())?;
        return out.finish(argv, "pipeline", p, verdict.member);
    }
    let cfg = PipelineConfig {
        mode: match mode {
            ModeName::Paper => PipelineMode::Paper { cap: args.cap },
            ModeName::Relaxed => PipelineMode::Relaxed {
                t_schedule: args.t_schedule.clone(),
            },
        },
        signing_budget: args.budget,
        factor_search: FactorSearch::Concentrated {
            max_trials: args.factor_trials,
        },
        dense_cap: args.dense_cap,
        exact_cap: args.exact_cap,
        allow_nonmember: args.allow_nonmember,
    };
    let run = run_pipeline(&triple, args.iters, &cfg, &mut substream(args.seed, 0))?;
    report.add(run.summary_section());
    if let Some(s) = &run.seed_summary {
        report.add(s.to_section("seed.spectrum"));
    }
    if let Some(seed) = &run.seed {
        out.write("stage_0.txt", &write_edge_list(seed))?;
    }
    for st in &run.stages {
        out.write(&format!("stage_{}.txt", st.index), &write_edge_list(&st.graph))?;
        let mut cert = Report::new();
        cert.add(st.section("stage"));
        for s in st.certificate.sections("certificate") {
            cert.add(s);
        }
        out.write(&format!("stage_{}_certificate.toml", st.index), &cert.render())?;
    }
    if let Some(g) = run.final_graph() {
        if g.n() <= args.dense_cap {
            let s = eigen_sym(&g.adjacency_matrix(), None)?;
            report.add(s.to_section("final.spectrum"));
        }
    }
    out.write("report.toml", &report.render())?;
    out.finish(argv, "pipeline", p, run.success())
}

fn cmd_lines(args: &LinesArgs, argv: &[String]) -> Result<Outcome> {
    let g = read_graph(&args.graph)?;
    let ell = args.ell.unwrap_or(g.n());
    let ens = ensemble_for_size(&g, args.lambda, ell, args.budget, &mut substream(args.seed, 0))?;
    let ls = extract_lines(&ens)?;
    let check = verify_line_system(&ls);
    let mut out = OutDir::create(&args.out)?;
    out.write("gram.txt", &write_gram(&ens))?;
    out.write("lines.txt", &write_lines(&ls))?;
    let mut r = Report::new();
    let mut top = Section::new("");
    top.push("summary", describe(&ls));
    r.add(top).add(ens.to_section("gram")).add(check.to_section("verification"));
    out.write("report.toml", &r.render())?;
    let mut p = Section::new("parameters");
    p.push("graph", args.graph.display().to_string())
        .push("lambda", args.lambda)
        .push("ell", ell)
        .push("seed", args.seed.to_string())
        .push("budget", args.budget);
    out.finish(argv, "lines", p, check.pass)
}

fn cmd_verify(args: &VerifyArgs, argv: &[String]) -> Result<Outcome> {
    let text = fs::read_to_string(&args.lines).with_context(|| format!("reading {}", args.lines.display()))?;
    let ls = parse_lines(&text).map_err(|e| anyhow!("parsing {}: {e}", args.lines.display()))?;
    let check = verify_line_system(&ls);
    let mut r = Report::new();
    r.add(check.to_section("verification"));
    match &args.out {
        Some(dir) => {
            let mut out = OutDir::create(dir)?;
            out.write("report.toml", &r.render())?;
            let mut p = Section::new("parameters");
            p.push("lines", args.lines.display().to_string());
            out.finish(argv, "verify", p, check.pass)
        }
        None => {
            print!("{}", r.render());
            Ok(Outcome {
                files: Vec::new(),
                success: check.pass,
            })
        }
    }
}

fn cmd_replay(args: &ReplayArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&args.manifest).with_context(|| format!("reading {}", args.manifest.display()))?;
    let table = Report::parse(&text)?;
    let argv: Vec<String> = table
        .get("argv")
        .and_then(|v| v.as_array())
        .ok_or_else(|| anyhow!("manifest has no argv"))?
        .iter()
        .map(|v| v.as_str().map(str::to_string).ok_or_else(|| anyhow!("argv entries must be strings")))
        .collect::<Result<_>>()?;
    if argv.first().map(String::as_str) == Some("replay") {
        bail!("a replay manifest cannot be replayed");
    }
    let mut full = vec!["eqlines".to_string()];
    full.extend(argv.iter().cloned());
    full.push("--out".into());
    full.push(args.out.display().to_string());
    let cli = Cli::try_parse_from(&full)?;
    dispatch(cli.command, &argv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn argv_normalization_drops_out_and_parallel() {
        let a = s(&["eqlines", "--parallel", "8", "lines", "--graph", "g.txt", "--out", "o", "--lambda=1"]);
        assert_eq!(normalized_argv(&a), s(&["lines", "--graph", "g.txt", "--lambda=1"]));
    }

    #[test]
    fn triple_specs() {
        let cli = Cli::try_parse_from(s(&["eqlines", "pipeline", "--surd", "t=12", "u=10", "--relaxed", "--iters", "0", "--out", "x"]))
            .unwrap();
        let Command::Pipeline(p) = cli.command else { panic!() };
        let tr = parse_triple(&p).unwrap();
        assert_eq!(tr.k(), 4);
        let cli = Cli::try_parse_from(s(&["eqlines", "pipeline", "--int", "d=8,a=2", "--out", "x"])).unwrap();
        let Command::Pipeline(p) = cli.command else { panic!() };
        assert_eq!(parse_triple(&p).unwrap().lambda1_mp(), 4.0);
    }

    #[test]
    fn weights_round_trip() {
        let text = write_weights(3, &[(0, 1), (1, 2)], &[0.5, -0.25]);
        let m = parse_weights(&text).unwrap();
        assert_eq!(m[(1, 0)], 0.5);
        assert_eq!(m[(2, 1)], -0.25);
    }
}
