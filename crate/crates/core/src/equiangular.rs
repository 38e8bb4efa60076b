//! Equiangular line systems from regular graphs with a repeated second
//! eigenvalue.

use nalgebra::{DMatrix, DVector};
use num_integer::Roots;
use thiserror::Error;

use crate::graph::{two_lift, Graph};
use crate::lifts::search_signing;
use crate::report::{fmt_float, Section};
use crate::rng::Stream;
use crate::spectral::{certify_by_conjugate_pairs, eigen_sym, eigh, SpectralError, SpectralTarget};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_REL_TOL: f64 = 1e-8;
/// Smallest eigenvalue accepted for a positive semidefinite Gram matrix.
pub const PSD_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-10;
pub const COS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquiangularError {
    #[error("graph is not regular")]
    NotRegular,
    #[error("lambda = {0} must be positive")]
    NonPositiveLambda(f64),
    #[error("lambda = {lambda} is not the second eigenvalue (lambda_2 = {second})")]
    NotSecondEigenvalue { lambda: f64, second: f64 },
    #[error("n = {n} is smaller than 2d = {}", 2 * d)]
    TooFewVertices { n: usize, d: usize },
    #[error("Gram matrix has eigenvalue {0} below -{PSD_TOL:e}")]
    NotPsd(f64),
    #[error("extension needs lambda >= 2 sqrt(d - 1) = {bound}, got lambda = {lambda}")]
    RamanujanCondition { lambda: f64, bound: f64 },
    #[error("extension needs lambda >= 2d/3 = {bound}, got lambda = {lambda}")]
    TwoThirdsCondition { lambda: f64, bound: f64 },
    #[error("sufficient condition (1 - 2(d - lambda)/n)(1 + 2 lambda/n) >= 1 fails: {value}")]
    SufficientCondition { value: f64 },
    #[error("ell = {ell} outside [n, 2n) = [{n}, {})", 2 * n)]
    EllOutOfRange { ell: usize, n: usize },
    #[error("doubling lift failed: best signed norm {best} > {threshold}")]
    DoublingFailed { best: f64, threshold: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// `M = (1 − α)I + αJ − 2αA_G`, possibly extended by rows of `+α`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramEnsemble {
    pub gram: DMatrix<f64>,
    pub alpha: f64,
    /// `λ = (1 − α)/(2α)`.
    pub lambda: f64,
    pub rank: usize,
    pub base_n: usize,
    pub degree: usize,
    /// Multiplicity of `λ` as second eigenvalue.
    pub mult_k: usize,
    /// Kernel dimension of the Gram matrix certified over the integers,
    /// when `λ` is an integer or of the form `2√(u²+1) − 1`.
    pub exact_k: Option<usize>,
    /// Largest deviation between the Gram spectrum and the transported
    /// graph spectrum; `None` for extended ensembles.
    pub transport_error: Option<f64>,
    pub min_eigenvalue: f64,
}

impl GramEnsemble {
    pub fn size(&self) -> usize {
        self.gram.nrows()
    }

    pub fn to_section(&self, name: &str) -> Section {
        let mut s = Section::new(name);
        s.push("size", self.size())
            .push("alpha", self.alpha)
            .push("lambda", self.lambda)
            .push("rank", self.rank)
            .push("base_n", self.base_n)
            .push("degree", self.degree)
            .push("mult_k", self.mult_k)
            .push("min_eigenvalue", self.min_eigenvalue);
        if let Some(k) = self.exact_k {
            s.push("exact_k", k);
        }
        if let Some(e) = self.transport_error {
            s.push("transport_error", e);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSystem {
    pub dim: usize,
    pub vectors: Vec<DVector<f64>>,
    pub alpha: f64,
}

/// Exact description of `λ` if it is an integer or `2√(u²+1) − 1`.
fn exact_target(lambda: f64) -> Option<SpectralTarget> {
    let r = lambda.round();
    if (lambda - r).abs() < 1e-9 {
        return Some(SpectralTarget::Integer(r as i64));
    }
    let u2 = ((lambda + 1.0) / 2.0).powi(2) - 1.0;
    let u = u2.round();
    if u >= 1.0 && (u2 - u).abs() < 1e-6 {
        let u = (u as u64).sqrt();
        let t = SpectralTarget::Surd(u);
        if (t.value() - lambda).abs() < 1e-9 {
            return Some(t);
        }
    }
    None
}

fn numeric_rank(values: &[f64]) -> usize {
    let top = values.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    values.iter().filter(|&&x| x.abs() > RANK_REL_TOL * top).count()
}

/// Builds the Gram matrix of a `d`-regular graph whose second eigenvalue is
/// `λ`, with `α = 1/(2λ + 1)`.
pub fn gram_from_graph(g: &Graph, lambda: f64) -> Result<GramEnsemble, EquiangularError> {
    let d = g.regularity().ok_or(EquiangularError::NotRegular)?;
    if lambda <= 0.0 {
        return Err(EquiangularError::NonPositiveLambda(lambda));
    }
    let n = g.n();
    if n < 2 * d {
        return Err(EquiangularError::TooFewVertices { n, d });
    }
    let a = g.adjacency_matrix();
    let summary = eigen_sym(&a, None)?;
    let second = summary.lambda(2).unwrap_or(f64::NEG_INFINITY);
    if (second - lambda).abs() > summary.tol {
        return Err(EquiangularError::NotSecondEigenvalue { lambda, second });
    }
    let top_is_lambda = (lambda - d as f64).abs() <= summary.tol;
    let mult_k = summary.multiplicity_of(lambda) - usize::from(top_is_lambda);
    let alpha = 1.0 / (2.0 * lambda + 1.0);
    let gram = DMatrix::from_fn(n, n, |i, j| {
        let base = if i == j { 1.0 } else { alpha };
        base - 2.0 * alpha * a[(i, j)]
    });
    let mut values = eigh(&gram)?.values;
    values.reverse();
    let min_eigenvalue = values.first().copied().unwrap_or(0.0);
    if min_eigenvalue < -PSD_TOL {
        return Err(EquiangularError::NotPsd(min_eigenvalue));
    }
    let mut predicted: Vec<f64> = summary.eigenvalues[1..].iter().map(|&mu| (1.0 - alpha) - 2.0 * alpha * mu).collect();
    predicted.push(1.0 - alpha + alpha * n as f64 - 2.0 * alpha * d as f64);
    predicted.sort_by(f64::total_cmp);
    let transport_error = values.iter().zip(&predicted).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let exact_k = match exact_target(lambda) {
        Some(t) => Some(certify_by_conjugate_pairs(&g.adjacency_int(), t)? - usize::from(top_is_lambda)),
        None => None,
    };
    Ok(GramEnsemble {
        rank: numeric_rank(&values),
        gram,
        alpha,
        lambda,
        base_n: n,
        degree: d,
        mult_k,
        exact_k,
        transport_error: Some(transport_error),
        min_eigenvalue,
    })
}

/// `(1 − 2(d − λ)/n)(1 + 2λ/n)`; at least 1 guarantees every extension up
/// to `2n` is positive semidefinite.
pub fn sufficient_condition(n: usize, d: usize, lambda: f64) -> f64 {
    let n = n as f64;
    (1.0 - 2.0 * (d as f64 - lambda) / n) * (1.0 + 2.0 * lambda / n)
}

/// `(α − (2αd − (1 − α))/n)(α + (1 − α)/t) − α²` for `t = ell − n ≥ 1`.
pub fn extension_margin(n: usize, d: usize, alpha: f64, ell: usize) -> f64 {
    let t = (ell - n) as f64;
    let x = alpha - (2.0 * alpha * d as f64 - (1.0 - alpha)) / n as f64;
    x * (alpha + (1.0 - alpha) / t) - alpha * alpha
}

/// Appends `ell − n` rows and columns with unit diagonal and `+α` elsewhere.
pub fn extend_gram(base: &GramEnsemble, ell: usize) -> Result<GramEnsemble, EquiangularError> {
    let n = base.base_n;
    if base.size() != n || ell < n || ell >= 2 * n {
        return Err(EquiangularError::EllOutOfRange { ell, n });
    }
    if ell == n {
        return Ok(base.clone());
    }
    let (d, lambda) = (base.degree, base.lambda);
    let ramanujan = 2.0 * ((d.max(1) - 1) as f64).sqrt();
    if lambda < ramanujan - 1e-12 {
        return Err(EquiangularError::RamanujanCondition { lambda, bound: ramanujan });
    }
    let two_thirds = 2.0 * d as f64 / 3.0;
    if lambda < two_thirds - 1e-12 {
        return Err(EquiangularError::TwoThirdsCondition { lambda, bound: two_thirds });
    }
    let value = sufficient_condition(n, d, lambda);
    if value < 1.0 - 1e-12 {
        return Err(EquiangularError::SufficientCondition { value });
    }
    let alpha = base.alpha;
    let gram = DMatrix::from_fn(ell, ell, |i, j| {
        if i < n && j < n {
            base.gram[(i, j)]
        } else if i == j {
            1.0
        } else {
            alpha
        }
    });
    let values = eigh(&gram)?.values;
    let min_eigenvalue = values.last().copied().unwrap_or(0.0);
    if min_eigenvalue < -PSD_TOL {
        return Err(EquiangularError::NotPsd(min_eigenvalue));
    }
    Ok(GramEnsemble {
        rank: numeric_rank(&values),
        gram,
        transport_error: None,
        min_eigenvalue,
        ..base.clone()
    })
}

/// Factors `gram = W⊺W` with one row of `W` per positive eigenvalue; the
/// columns of `W` are the unit vectors.
pub fn extract_lines(ens: &GramEnsemble) -> Result<LineSystem, EquiangularError> {
    let e = eigh(&ens.gram)?;
    if let Some(&lo) = e.values.last() {
        if lo < -PSD_TOL {
            return Err(EquiangularError::NotPsd(lo));
        }
    }
    let dim = numeric_rank(&e.values);
    let n = ens.size();
    let w = DMatrix::from_fn(dim, n, |r, c| e.values[r].max(0.0).sqrt() * e.vectors[(c, r)]);
    let vectors = (0..n).map(|c| w.column(c).into_owned()).collect();
    Ok(LineSystem {
        dim,
        vectors,
        alpha: ens.alpha,
    })
}

/// Extends by Ramanujan 2-lifts until `ell < 2n`, then builds and extends
/// the Gram matrix.
pub fn ensemble_for_size(
    g: &Graph,
    lambda: f64,
    ell: usize,
    budget: usize,
    rng: &mut Stream,
) -> Result<GramEnsemble, EquiangularError> {
    let mut graph = g.clone();
    while ell >= 2 * graph.n() {
        let d = graph.regularity().ok_or(EquiangularError::NotRegular)?;
        let threshold = 2.0 * ((d.max(1) - 1) as f64).sqrt();
        let cert = search_signing(&graph, threshold, budget, rng);
        if !cert.met {
            return Err(EquiangularError::DoublingFailed {
                best: cert.norm_of_as,
                threshold,
            });
        }
        graph = two_lift(&cert.signing);
    }
    let base = gram_from_graph(&graph, lambda)?;
    if ell <= base.base_n {
        return Ok(base);
    }
    extend_gram(&base, ell)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Obstruction {
    /// `2√t − 1` is not the top eigenvalue of any graph.
    KInfinite,
    /// `t` is a perfect square; the shortcut says nothing.
    Inconclusive,
}

/// Perfect-square test for `λ = 2√t − 1`.
pub fn surd_obstruction(t: u64) -> Obstruction {
    let r = t.sqrt();
    if r * r == t {
        Obstruction::Inconclusive
    } else {
        Obstruction::KInfinite
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineReport {
    pub pass: bool,
    pub count: usize,
    pub dim: usize,
    pub alpha: f64,
    pub max_norm_dev: f64,
    pub max_cos_dev: f64,
    /// Pair with the largest cosine deviation.
    pub worst_pair: Option<(usize, usize)>,
    /// `count − dim`: the `k` in `N_α(dim) ≥ dim + k`.
    pub excess: i64,
}

impl LineReport {
    pub fn to_section(&self, name: &str) -> Section {
        let mut s = Section::new(name);
        s.push("pass", self.pass)
            .push("count", self.count)
            .push("dim", self.dim)
            .push("alpha", self.alpha)
            .push("max_norm_dev", self.max_norm_dev)
            .push("max_cos_dev", self.max_cos_dev)
            .push("excess", self.excess);
        if let Some((i, j)) = self.worst_pair {
            s.push("worst_pair", vec![i, j]);
        }
        s
    }
}

pub fn verify_line_system(ls: &LineSystem) -> LineReport {
    let mut max_norm_dev: f64 = 0.0;
    for v in &ls.vectors {
        max_norm_dev = max_norm_dev.max((v.norm() - 1.0).abs());
    }
    let mut max_cos_dev: f64 = 0.0;
    let mut worst_pair = None;
    for i in 0..ls.vectors.len() {
        for j in i + 1..ls.vectors.len() {
            let dev = (ls.vectors[i].dot(&ls.vectors[j]).abs() - ls.alpha).abs();
            if dev > max_cos_dev || worst_pair.is_none() {
                max_cos_dev = dev;
                worst_pair = Some((i, j));
            }
        }
    }
    LineReport {
        pass: max_norm_dev <= NORM_TOL && max_cos_dev <= COS_TOL,
        count: ls.vectors.len(),
        dim: ls.dim,
        alpha: ls.alpha,
        max_norm_dev,
        max_cos_dev,
        worst_pair,
        excess: ls.vectors.len() as i64 - ls.dim as i64,
    }
}

/// `dim count alpha` header, then one vector per line.
pub fn write_lines(ls: &LineSystem) -> String {
    let mut out = format!("{} {} {}\n", ls.dim, ls.vectors.len(), ls.alpha);
    for v in &ls.vectors {
        let row: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_lines(text: &str) -> Result<LineSystem, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or("missing header")?.split_whitespace().collect();
    let [dim, count, alpha] = header[..] else {
        return Err("header must be `dim count alpha`".into());
    };
    let dim: usize = dim.parse().map_err(|_| "bad dimension")?;
    let count: usize = count.parse().map_err(|_| "bad count")?;
    let alpha: f64 = alpha.parse().map_err(|_| "bad alpha")?;
    let mut vectors = Vec::with_capacity(count);
    for line in lines {
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| format!("bad entry `{t}`")))
            .collect::<Result<_, _>>()?;
        if v.len() != dim {
            return Err(format!("expected {dim} coordinates"));
        }
        vectors.push(DVector::from_vec(v));
    }
    if vectors.len() != count {
        return Err(format!("expected {count} vectors"));
    }
    Ok(LineSystem { dim, vectors, alpha })
}

/// `n alpha lambda k` header, then the matrix rows.
pub fn write_gram(ens: &GramEnsemble) -> String {
    let n = ens.size();
    let mut out = format!("{} {} {} {}\n", n, ens.alpha, ens.lambda, ens.mult_k);
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{}", ens.gram[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Header fields and matrix of a Gram file.
pub fn parse_gram(text: &str) -> Result<(f64, f64, usize, DMatrix<f64>), String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or("missing header")?.split_whitespace().collect();
    let [n, alpha, lambda, k] = header[..] else {
        return Err("header must be `n alpha lambda k`".into());
    };
    let n: usize = n.parse().map_err(|_| "bad size")?;
    let alpha: f64 = alpha.parse().map_err(|_| "bad alpha")?;
    let lambda: f64 = lambda.parse().map_err(|_| "bad lambda")?;
    let k: usize = k.parse().map_err(|_| "bad k")?;
    let mut data = Vec::with_capacity(n * n);
    for line in lines {
        for t in line.split_whitespace() {
            data.push(t.parse::<f64>().map_err(|_| format!("bad entry `{t}`"))?);
        }
    }
    if data.len() != n * n {
        return Err(format!("expected {} entries", n * n));
    }
    Ok((alpha, lambda, k, DMatrix::from_row_slice(n, n, &data)))
}

/// Human-readable angle summary used in reports.
pub fn describe(ls: &LineSystem) -> String {
    format!(
        "{} lines in dimension {} at angle arccos({})",
        ls.vectors.len(),
        ls.dim,
        fmt_float(ls.alpha)
    )
}
