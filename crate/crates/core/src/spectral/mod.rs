//! Symmetric eigenanalysis, multiplicity clustering and exact multiplicity
//! certification.
//!
//! The dense solver is nalgebra's Householder tridiagonalization followed
//! by implicit symmetric QR; every spectrum in this crate stays below a few
//! thousand dimensions.

pub mod exact;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::report::{Section, Value};
use exact::IntMatrix;

/// Entrywise symmetry tolerance accepted by the dense solver.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("conjugate {conjugate} may be present (numeric eigenvalue {found} within {window:e}); exact certification unavailable")]
    ConjugateGuard {
        conjugate: f64,
        found: f64,
        window: f64,
    },
    #[error("target polynomial overflows 64-bit arithmetic")]
    Overflow,
}

/// Eigenvalues in descending order with matching unit eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<(), SpectralError> {
    if a.nrows() != a.ncols() {
        return Err(SpectralError::NotSquare(a.nrows(), a.ncols()));
    }
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if worst > SYMMETRY_TOL {
        return Err(SpectralError::NotSymmetric(worst));
    }
    Ok(())
}

/// Full eigendecomposition, eigenvalues descending.
pub fn eigh(a: &DMatrix<f64>) -> Result<Eigen, SpectralError> {
    check_symmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let se = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].total_cmp(&se.eigenvalues[i]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    Ok(Eigen { values, vectors })
}

/// Eigenvalues only, descending.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>, SpectralError> {
    check_symmetric(a)?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut v: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    Ok(v)
}

pub fn lambda_max(a: &DMatrix<f64>) -> Result<f64, SpectralError> {
    Ok(eigenvalues(a)?.first().copied().unwrap_or(0.0))
}

/// Spectral norm of a symmetric matrix.
pub fn sym_norm(a: &DMatrix<f64>) -> Result<f64, SpectralError> {
    let v = eigenvalues(a)?;
    Ok(v.first().map_or(0.0, |&hi| hi.abs().max(v.last().unwrap().abs())))
}

/// Spectral norm of the symmetric matrix with zero diagonal and entries
/// `w_e` at both positions of every edge `e`. Decomposes over the connected
/// components of the support.
pub fn edge_weighted_norm(n: usize, edges: &[(usize, usize)], weights: &[f64]) -> f64 {
    edge_weighted_extreme(n, edges, weights, |v| v.first().unwrap().abs().max(v.last().unwrap().abs()))
}

/// Largest eigenvalue of an edge-weighted symmetric matrix (zero diagonal).
pub fn edge_weighted_lambda_max(n: usize, edges: &[(usize, usize)], weights: &[f64]) -> f64 {
    // zero diagonal: every block has trace 0, so the top eigenvalue is >= 0
    edge_weighted_extreme(n, edges, weights, |v| v[0])
}

fn edge_weighted_extreme(
    n: usize,
    edges: &[(usize, usize)],
    weights: &[f64],
    pick: impl Fn(&[f64]) -> f64,
) -> f64 {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (&(u, v), &w) in edges.iter().zip(weights) {
        if w != 0.0 {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut local = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut comp_of_root = vec![usize::MAX; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        if comp_of_root[r] == usize::MAX {
            comp_of_root[r] = comps.len();
            comps.push(Vec::new());
        }
        let c = comp_of_root[r];
        local[v] = comps[c].len();
        comps[c].push(v);
    }
    let mut mats: Vec<DMatrix<f64>> = comps.iter().map(|c| DMatrix::zeros(c.len(), c.len())).collect();
    for (&(u, v), &w) in edges.iter().zip(weights) {
        if w != 0.0 {
            let c = comp_of_root[find(&mut parent, u)];
            mats[c][(local[u], local[v])] += w;
            mats[c][(local[v], local[u])] += w;
        }
    }
    mats.iter()
        .filter(|m| m.nrows() > 1)
        .map(|m| pick(&eigenvalues(m).expect("symmetric by construction")))
        .fold(if n > 0 { pick(&[0.0]) } else { 0.0 }, f64::max)
}

/// `1e-6 * max(1, max absolute row sum)`.
pub fn default_tol(a: &DMatrix<f64>) -> f64 {
    let row_sum = a.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    1e-6 * row_sum.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenGroup {
    pub value: f64,
    pub multiplicity: usize,
}

/// Descending spectrum with tolerance clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    pub groups: Vec<EigenGroup>,
    pub tol: f64,
}

impl SpectralSummary {
    /// Clusters a descending spectrum: consecutive eigenvalues closer than
    /// `tol` share a group, whose value is their mean.
    pub fn from_eigenvalues(eigenvalues: Vec<f64>, tol: f64) -> Self {
        let mut groups: Vec<EigenGroup> = Vec::new();
        let mut start = 0;
        for i in 0..eigenvalues.len() {
            let last = i + 1 == eigenvalues.len();
            if last || eigenvalues[i] - eigenvalues[i + 1] > tol {
                let slice = &eigenvalues[start..=i];
                groups.push(EigenGroup {
                    value: slice.iter().sum::<f64>() / slice.len() as f64,
                    multiplicity: slice.len(),
                });
                start = i + 1;
            }
        }
        SpectralSummary {
            eigenvalues,
            groups,
            tol,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `i`-th largest eigenvalue, 1-based, counted with multiplicity.
    pub fn lambda(&self, i: usize) -> Option<f64> {
        self.eigenvalues.get(i.checked_sub(1)?).copied()
    }

    /// Number of eigenvalues within `tol` of `value`.
    pub fn multiplicity_of(&self, value: f64) -> usize {
        self.eigenvalues.iter().filter(|&&x| (x - value).abs() <= self.tol).count()
    }

    pub fn to_section(&self, name: &str) -> Section {
        let mut s = Section::new(name);
        s.push("dim", self.dim());
        s.push("tol", self.tol);
        s.push(
            "groups",
            Value::Array(
                self.groups
                    .iter()
                    .map(|g| Value::Array(vec![g.value.into(), g.multiplicity.into()]))
                    .collect(),
            ),
        );
        s
    }
}

/// Eigendecomposition summarized at `tol` (default [`default_tol`]).
pub fn eigen_sym(a: &DMatrix<f64>, tol: Option<f64>) -> Result<SpectralSummary, SpectralError> {
    let tol = tol.unwrap_or_else(|| default_tol(a));
    Ok(SpectralSummary::from_eigenvalues(eigenvalues(a)?, tol))
}

/// The algebraic eigenvalues this crate targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralTarget {
    /// `λ = ℓ`.
    Integer(i64),
    /// `λ = 2√(u²+1) − 1`, a root of `x² + 2x − (4u² + 3)`.
    Surd(u64),
}

impl SpectralTarget {
    pub fn value(&self) -> f64 {
        match *self {
            SpectralTarget::Integer(l) => l as f64,
            SpectralTarget::Surd(u) => 2.0 * ((u as f64).powi(2) + 1.0).sqrt() - 1.0,
        }
    }

    /// The other root of the minimal polynomial, if any.
    pub fn conjugate(&self) -> Option<f64> {
        match *self {
            SpectralTarget::Integer(_) => None,
            SpectralTarget::Surd(u) => Some(-2.0 * ((u as f64).powi(2) + 1.0).sqrt() - 1.0),
        }
    }

    /// Integer coefficients, leading first.
    pub fn minimal_polynomial(&self) -> Vec<i64> {
        match *self {
            SpectralTarget::Integer(l) => vec![1, -l],
            SpectralTarget::Surd(u) => {
                let u = u as i64;
                vec![1, 2, -(4 * u * u + 3)]
            }
        }
    }
}

/// Exact multiplicity of `target` as an eigenvalue of the integer symmetric
/// matrix `a`: the rational nullity of `p(a)` for the minimal polynomial `p`.
/// For surds this counts both roots, so it is refused whenever the numeric
/// spectrum has an eigenvalue within `10 * tol` of the conjugate.
pub fn certify_multiplicity(
    a: &IntMatrix,
    target: SpectralTarget,
    summary: &SpectralSummary,
) -> Result<usize, SpectralError> {
    if !a.is_symmetric() {
        return Err(SpectralError::NotSymmetric(f64::NAN));
    }
    if let Some(conj) = target.conjugate() {
        let window = 10.0 * summary.tol;
        if let Some(&found) = summary.eigenvalues.iter().find(|&&x| (x - conj).abs() <= window) {
            return Err(SpectralError::ConjugateGuard {
                conjugate: conj,
                found,
                window,
            });
        }
    }
    let p = poly_at(a, &target.minimal_polynomial())?;
    Ok(p.nullity())
}

/// Exact multiplicity of a surd eigenvalue by conjugate pairing: for an
/// integer matrix the two roots of an irreducible quadratic occur with equal
/// multiplicity, so each is half the nullity of `p(a)`. Integer targets reduce
/// to the plain kernel dimension.
pub fn certify_by_conjugate_pairs(a: &IntMatrix, target: SpectralTarget) -> Result<usize, SpectralError> {
    if !a.is_symmetric() {
        return Err(SpectralError::NotSymmetric(f64::NAN));
    }
    let nullity = poly_at(a, &target.minimal_polynomial())?.nullity();
    match target {
        SpectralTarget::Integer(_) => Ok(nullity),
        SpectralTarget::Surd(u) => {
            // u² + 1 lies strictly between consecutive squares, so p is irreducible
            assert!(u >= 1, "Surd(0) is the integer 1");
            debug_assert_eq!(nullity % 2, 0);
            Ok(nullity / 2)
        }
    }
}

fn poly_at(a: &IntMatrix, coeffs: &[i64]) -> Result<IntMatrix, SpectralError> {
    let n = a.rows();
    // entries of A^2 are bounded by n * max|a|^2; keep everything inside i64
    let max = (0..n).flat_map(|i| a.row(i).iter().map(|x| x.unsigned_abs())).max().unwrap_or(0);
    let cmax = coeffs.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    let bound = (n as u128 * u128::from(max).pow(2) + 2 * u128::from(max) + u128::from(cmax)) * 2;
    if bound > i64::MAX as u128 {
        return Err(SpectralError::Overflow);
    }
    Ok(a.eval_poly(coeffs))
}

/// Maximum of `R x² + 2S xy + T y²` over the unit circle.
pub fn max_quadform_2x2(r: f64, s: f64, t: f64) -> f64 {
    (r + t + ((r - t).powi(2) + 4.0 * s * s).sqrt()) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;

    fn groups(s: &SpectralSummary) -> Vec<(f64, usize)> {
        s.groups.iter().map(|g| ((g.value * 1e6).round() / 1e6, g.multiplicity)).collect()
    }

    #[test]
    fn complete_bipartite_spectrum() {
        let s = eigen_sym(&complete_bipartite(4, 4).adjacency_matrix(), None).unwrap();
        assert_eq!(groups(&s), vec![(4.0, 1), (0.0, 6), (-4.0, 1)]);
    }

    #[test]
    fn petersen_spectrum() {
        let s = eigen_sym(&petersen().adjacency_matrix(), None).unwrap();
        assert_eq!(groups(&s), vec![(3.0, 1), (1.0, 5), (-2.0, 4)]);
    }

    #[test]
    fn one_by_one() {
        let s = eigen_sym(&DMatrix::from_element(1, 1, 2.5), None).unwrap();
        assert_eq!(groups(&s), vec![(2.5, 1)]);
    }

    #[test]
    fn rejects_asymmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(eigen_sym(&a, None), Err(SpectralError::NotSymmetric(_))));
    }

    #[test]
    fn certify_integer_targets() {
        let k4 = complete(4);
        let s = eigen_sym(&k4.adjacency_matrix(), None).unwrap();
        assert_eq!(certify_multiplicity(&k4.adjacency_int(), SpectralTarget::Integer(-1), &s), Ok(3));
        let c4 = cycle(4);
        let s = eigen_sym(&c4.adjacency_matrix(), None).unwrap();
        assert_eq!(certify_multiplicity(&c4.adjacency_int(), SpectralTarget::Integer(2), &s), Ok(1));
    }

    #[test]
    fn surd_guard_trips_on_conjugate() {
        let u = 10i64;
        let mp = IntMatrix::from_rows(&[
            vec![0, u, u, 1],
            vec![u, 0, -3, u],
            vec![u, -3, 0, u],
            vec![1, u, u, 0],
        ]);
        let s = eigen_sym(&mp.to_f64(), None).unwrap();
        let err = certify_multiplicity(&mp, SpectralTarget::Surd(10), &s).unwrap_err();
        assert!(matches!(err, SpectralError::ConjugateGuard { .. }));
        // p(M') vanishes on both roots
        assert_eq!(mp.eval_poly(&SpectralTarget::Surd(10).minimal_polynomial()).nullity(), 2);
    }

    #[test]
    fn surd_polynomial_has_target_root() {
        for u in [1u64, 2, 10, 100_000] {
            let t = SpectralTarget::Surd(u);
            let x = t.value();
            let c = t.minimal_polynomial();
            let val = x * x + c[1] as f64 * x + c[2] as f64;
            assert!(val.abs() < 1e-6 * x * x, "u={u}");
        }
        assert_eq!(SpectralTarget::Integer(5).minimal_polynomial(), vec![1, -5]);
    }

    #[test]
    fn quadform_closed_form() {
        assert_eq!(max_quadform_2x2(1.0, 0.0, 1.0), 1.0);
        assert_eq!(max_quadform_2x2(3.0, 0.0, -2.0), 3.0);
        assert_eq!(max_quadform_2x2(-1.0, 0.0, 4.0), 4.0);
        let v = max_quadform_2x2(17533.0, 3560.0, 3857.0);
        assert!((v - 18404.0).abs() < 1.0 && v <= 18440.0, "{v}");
    }

    #[test]
    fn edge_weighted_norm_matches_dense() {
        let g = cycle(6);
        let w = [0.5, -1.0, 2.0, 0.0, 1.5, -0.25];
        let mut dense = DMatrix::zeros(6, 6);
        for (&(u, v), &x) in g.edges().iter().zip(&w) {
            dense[(u, v)] = x;
            dense[(v, u)] = x;
        }
        let direct = sym_norm(&dense).unwrap();
        assert!((edge_weighted_norm(6, g.edges(), &w) - direct).abs() < 1e-12);
        let top = lambda_max(&dense).unwrap();
        assert!((edge_weighted_lambda_max(6, g.edges(), &w) - top).abs() < 1e-12);
    }
}
