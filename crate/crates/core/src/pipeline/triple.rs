//! Matrix triples `(M, M′, β)` and the feasibility test.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::report::Section;
use crate::spectral::exact::IntMatrix;
use crate::spectral::{lambda_max, max_quadform_2x2, SpectralTarget};

/// Slack allowed on the feasibility margin.
pub const MEMBER_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TripleError {
    #[error("M and M' must be square of the same size")]
    Shape,
    #[error("M must be symmetric with zero diagonal and nonnegative entries")]
    NotAdjacency,
    #[error("M is reducible (its multigraph is disconnected)")]
    Reducible,
    #[error("M' is not a sign matrix of M at ({i},{j}): M={m}, M'={mp}")]
    NotSignMatrix { i: usize, j: usize, m: i64, mp: i64 },
    #[error("beta = {0} outside (0, 1/2)")]
    BetaRange(f64),
    #[error("degenerate integer family: d = {d}, a = {a}, d - 2a = {} <= 0", *d as i64 - 2 * *a as i64)]
    Degenerate { d: u64, a: u64 },
    #[error("t = {t} and u = {u} must satisfy t > u >= 1 with equal parity")]
    SurdParameters { t: u64, u: u64 },
    #[error("t = {0} is too small for the 3-regular layers (need t >= 3)")]
    SurdTooSmall(u64),
    #[error("(t, u) = ({t}, {u}) outside 5t/6 <= u <= t - 56 sqrt(t) - 62")]
    StrictRange { t: u64, u: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `M = [[0,d],[d,0]]`, `M′ = [[0,d−2a],[d−2a,0]]`.
    Integer { d: u64, a: u64 },
    /// The 4×4 pattern with parameters `(t, u)`.
    Surd { t: u64, u: u64 },
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTriple {
    pub m: IntMatrix,
    pub mp: IntMatrix,
    pub beta: f64,
    pub family: Family,
}

/// Outcome of the feasibility inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleReport {
    pub member: bool,
    /// Top eigenvalue of the 2×2 test matrix.
    pub lhs: f64,
    /// `λ_1(M′)`.
    pub rhs: f64,
    pub margin: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub lambda1_d: f64,
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

impl TripleReport {
    pub fn to_section(&self, name: &str) -> Section {
        let mut s = Section::new(name);
        s.push("member", self.member)
            .push("lhs", self.lhs)
            .push("rhs", self.rhs)
            .push("margin", self.margin)
            .push("gamma", self.gamma)
            .push("sigma", self.sigma)
            .push("lambda1_d", self.lambda1_d)
            .push("quadform", vec![self.r, self.s, self.t]);
        s
    }
}

fn to_dense(m: &IntMatrix) -> DMatrix<f64> {
    m.to_f64()
}

impl MatrixTriple {
    pub fn new(m: IntMatrix, mp: IntMatrix, beta: f64) -> Result<Self, TripleError> {
        check_structure(&m, &mp)?;
        Ok(MatrixTriple {
            m,
            mp,
            beta,
            family: Family::Custom,
        })
    }

    pub fn k(&self) -> usize {
        self.m.rows()
    }

    /// `D = (M − M′)/2`.
    pub fn d_matrix(&self) -> IntMatrix {
        let k = self.k();
        let mut d = IntMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                d.set(i, j, (self.m.get(i, j) - self.mp.get(i, j)) / 2);
            }
        }
        d
    }

    /// `σ = Σ_{i,j} √M_ij` over ordered pairs.
    pub fn sigma(&self) -> f64 {
        let k = self.k();
        (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| (self.m.get(i, j) as f64).sqrt())
            .sum()
    }

    /// `γ = λ_1(|D − βM|)`, absolute value entrywise.
    pub fn gamma(&self) -> f64 {
        let d = self.d_matrix();
        let k = self.k();
        let mat = DMatrix::from_fn(k, k, |i, j| (d.get(i, j) as f64 - self.beta * self.m.get(i, j) as f64).abs());
        lambda_max(&mat).expect("symmetric")
    }

    pub fn lambda1_m(&self) -> f64 {
        lambda_max(&to_dense(&self.m)).expect("symmetric")
    }

    pub fn lambda1_mp(&self) -> f64 {
        match self.family {
            Family::Integer { d, a } => d as f64 - 2.0 * a as f64,
            // spec(M′) = {2√(u²+1)−1, −2√(u²+1)−1, 3, −1}
            Family::Surd { u, .. } => (2.0 * ((u * u + 1) as f64).sqrt() - 1.0).max(3.0),
            Family::Custom => lambda_max(&to_dense(&self.mp)).expect("symmetric"),
        }
    }

    /// Exact description of `λ_1(M′)` when the family provides one.
    pub fn target(&self) -> Option<SpectralTarget> {
        match self.family {
            Family::Integer { d, a } => Some(SpectralTarget::Integer(d as i64 - 2 * a as i64)),
            Family::Surd { u, .. } if u >= 2 => Some(SpectralTarget::Surd(u)),
            Family::Surd { .. } => Some(SpectralTarget::Integer(3)),
            Family::Custom => {
                let l = self.lambda1_mp();
                let r = l.round();
                ((l - r).abs() < 1e-9).then_some(SpectralTarget::Integer(r as i64))
            }
        }
    }

    /// Whether the all-ones vector is an eigenvector of `M` (constant row sums).
    pub fn has_constant_row_sums(&self) -> bool {
        let k = self.k();
        let sums: Vec<i64> = (0..k).map(|i| self.m.row(i).iter().sum()).collect();
        sums.windows(2).all(|w| w[0] == w[1])
    }

    pub fn to_section(&self, name: &str) -> Section {
        let mut s = Section::new(name);
        let rows = |m: &IntMatrix| -> Vec<Vec<i64>> { (0..m.rows()).map(|i| m.row(i).to_vec()).collect() };
        let family = match self.family {
            Family::Integer { .. } => "integer",
            Family::Surd { .. } => "surd",
            Family::Custom => "custom",
        };
        s.push("family", family);
        match self.family {
            Family::Integer { d, a } => {
                s.push("d", d).push("a", a);
            }
            Family::Surd { t, u } => {
                s.push("t", t).push("u", u);
            }
            Family::Custom => {}
        }
        s.push("k", self.k())
            .push("m", rows(&self.m))
            .push("m_prime", rows(&self.mp))
            .push("beta", self.beta)
            .push("lambda1_m", self.lambda1_m())
            .push("lambda1_m_prime", self.lambda1_mp());
        s
    }
}

fn check_structure(m: &IntMatrix, mp: &IntMatrix) -> Result<(), TripleError> {
    let k = m.rows();
    if m.cols() != k || mp.rows() != k || mp.cols() != k || k == 0 {
        return Err(TripleError::Shape);
    }
    if !m.is_symmetric() || !mp.is_symmetric() {
        return Err(TripleError::NotAdjacency);
    }
    for i in 0..k {
        if m.get(i, i) != 0 || (0..k).any(|j| m.get(i, j) < 0) {
            return Err(TripleError::NotAdjacency);
        }
    }
    let mut seen = vec![false; k];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..k {
            if m.get(i, j) > 0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(TripleError::Reducible);
    }
    for i in 0..k {
        for j in 0..k {
            let (x, y) = (m.get(i, j), mp.get(i, j));
            if (x - y).rem_euclid(2) != 0 || y.abs() > x {
                return Err(TripleError::NotSignMatrix { i, j, m: x, mp: y });
            }
        }
    }
    Ok(())
}

/// Evaluates the feasibility inequality for `(M, M′, β)`.
pub fn validate_triple(m: &IntMatrix, mp: &IntMatrix, beta: f64) -> Result<TripleReport, TripleError> {
    let triple = MatrixTriple::new(m.clone(), mp.clone(), beta)?;
    validate(&triple)
}

/// [`validate_triple`] for an assembled triple, using its exact `λ_1(M′)`
/// when the family provides one.
pub fn validate(triple: &MatrixTriple) -> Result<TripleReport, TripleError> {
    check_structure(&triple.m, &triple.mp)?;
    let beta = triple.beta;
    if !(beta > 0.0 && beta < 0.5) {
        return Err(TripleError::BetaRange(beta));
    }
    let rhs = triple.lambda1_mp();
    let lambda1_d = lambda_max(&to_dense(&triple.d_matrix())).expect("symmetric");
    let gamma = triple.gamma();
    let sigma = triple.sigma();
    let r = (1.0 - 2.0 * beta) * rhs + 2.0 * gamma + 7.0 * sigma;
    let s = 2.0 * lambda1_d;
    let t = 2.0 * lambda1_d + sigma;
    let lhs = max_quadform_2x2(r, s, t);
    let margin = rhs - lhs;
    Ok(TripleReport {
        member: margin >= -MEMBER_TOL,
        lhs,
        rhs,
        margin,
        gamma,
        sigma,
        lambda1_d,
        r,
        s,
        t,
    })
}

/// Smallest `a` with `a² ≥ 144 d`, i.e. `⌈12√d⌉`.
pub fn twelve_sqrt_ceil(d: u64) -> u64 {
    let target = 144 * d;
    let mut a = (target as f64).sqrt() as u64;
    while a * a < target {
        a += 1;
    }
    while a > 0 && (a - 1) * (a - 1) >= target {
        a -= 1;
    }
    a
}

/// The integer family with `a = ⌈12√d⌉` and `β = a/d`.
pub fn integer_triple(d: u64) -> Result<MatrixTriple, TripleError> {
    let a = twelve_sqrt_ceil(d);
    if d <= 2 * a {
        return Err(TripleError::Degenerate { d, a });
    }
    bipartite_triple(d, a)
}

/// The integer family with an explicit factor degree `a`, `1 <= a < d/2`.
pub fn bipartite_triple(d: u64, a: u64) -> Result<MatrixTriple, TripleError> {
    if a == 0 || d <= 2 * a {
        return Err(TripleError::Degenerate { d, a });
    }
    let (di, li) = (d as i64, d as i64 - 2 * a as i64);
    Ok(MatrixTriple {
        m: IntMatrix::from_rows(&[vec![0, di], vec![di, 0]]),
        mp: IntMatrix::from_rows(&[vec![0, li], vec![li, 0]]),
        beta: a as f64 / d as f64,
        family: Family::Integer { d, a },
    })
}

/// Whether `5t/6 <= u <= t − 56√t − 62`, decided in integers.
pub fn surd_strict_range(t: u64, u: u64) -> bool {
    if 6 * u < 5 * t || t < u + 62 {
        return false;
    }
    let gap = (t - u - 62) as u128;
    gap * gap >= 3136 * t as u128
}

/// The 4×4 surd family with `β = (t−u)/(2t)`.
pub fn surd_triple(t: u64, u: u64, strict: bool) -> Result<MatrixTriple, TripleError> {
    if u < 1 || t <= u || (t - u) % 2 != 0 {
        return Err(TripleError::SurdParameters { t, u });
    }
    if t < 3 {
        return Err(TripleError::SurdTooSmall(t));
    }
    if strict && !surd_strict_range(t, u) {
        return Err(TripleError::StrictRange { t, u });
    }
    let (ti, ui) = (t as i64, u as i64);
    let m = IntMatrix::from_rows(&[
        vec![0, ti, ti, 3],
        vec![ti, 0, 3, ti],
        vec![ti, 3, 0, ti],
        vec![3, ti, ti, 0],
    ]);
    let mp = IntMatrix::from_rows(&[
        vec![0, ui, ui, 1],
        vec![ui, 0, -3, ui],
        vec![ui, -3, 0, ui],
        vec![1, ui, ui, 0],
    ]);
    Ok(MatrixTriple {
        m,
        mp,
        beta: (t - u) as f64 / (2 * t) as f64,
        family: Family::Surd { t, u },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_sqrt_ceiling() {
        assert_eq!(twelve_sqrt_ceil(22000), 1780);
        assert_eq!(twelve_sqrt_ceil(100), 120);
        assert_eq!(twelve_sqrt_ceil(1), 12);
        assert_eq!(twelve_sqrt_ceil(0), 0);
    }

    #[test]
    fn integer_family_at_22000() {
        let tr = integer_triple(22000).unwrap();
        assert_eq!(tr.lambda1_mp(), 18440.0);
        let rep = validate(&tr).unwrap();
        assert!(rep.member && rep.margin > 0.0);
        assert!(matches!(integer_triple(100), Err(TripleError::Degenerate { d: 100, a: 120 })));
    }

    #[test]
    fn surd_family_membership() {
        assert!(surd_strict_range(119414, 100000));
        let tr = surd_triple(119414, 100000, true).unwrap();
        let rep = validate(&tr).unwrap();
        assert!(rep.member, "margin {}", rep.margin);
        assert!(surd_triple(12, 10, true).is_err());
        assert!(surd_triple(12, 11, false).is_err());
        assert!(surd_triple(12, 10, false).is_ok());
    }

    #[test]
    fn structural_rejections() {
        let m = IntMatrix::from_rows(&[vec![0, 4], vec![4, 0]]);
        let bad = IntMatrix::from_rows(&[vec![0, 3], vec![3, 0]]);
        assert!(matches!(validate_triple(&m, &bad, 0.25), Err(TripleError::NotSignMatrix { .. })));
        let ok = IntMatrix::from_rows(&[vec![0, 2], vec![2, 0]]);
        assert_eq!(validate_triple(&m, &ok, 0.6), Err(TripleError::BetaRange(0.6)));
        let red = IntMatrix::from_rows(&[vec![0, 0], vec![0, 0]]);
        assert_eq!(validate_triple(&red, &red, 0.25), Err(TripleError::Reducible));
    }
}
