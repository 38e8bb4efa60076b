//! Concentrated-factor selection and empirical tail audits.

use nalgebra::DMatrix;
use rand::RngCore;
use rayon::prelude::*;

use super::{ceil_log2, FactorError, FactorSample, FactorSampler};
use crate::report::Section;
use crate::rng::{substream, Stream};
use crate::spectral::sym_norm;

/// Trials evaluated together; fixed so results do not depend on the pool size.
const BATCH: usize = 16;

#[derive(Debug, Clone)]
pub struct Selection {
    pub sample: FactorSample,
    /// `‖B⊺(A_H − (a/d)A_G)B‖` of the accepted sample.
    pub value: f64,
    /// `7√d`.
    pub bound: f64,
    /// 1-based index of the accepted trial.
    pub trials: usize,
}

/// `‖B⊺(A_H − (a/d)A_G)B‖` for an `n × r` basis `B`.
pub fn compression_norm(sample: &FactorSample, basis: &DMatrix<f64>) -> f64 {
    let r = basis.ncols();
    if r == 0 {
        return 0.0;
    }
    let g = &sample.base;
    let ratio = sample.a as f64 / sample.d as f64;
    let mask = sample.in_h();
    let mut xb = DMatrix::<f64>::zeros(g.n(), r);
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let w = f64::from(u8::from(mask[e])) - ratio;
        for c in 0..r {
            xb[(u, c)] += w * basis[(v, c)];
            xb[(v, c)] += w * basis[(u, c)];
        }
    }
    let c = basis.transpose() * xb;
    let sym = (&c + c.transpose()) * 0.5;
    sym_norm(&sym).expect("symmetrized")
}

fn check_orthonormal(basis: &DMatrix<f64>, n: usize) -> Result<(), FactorError> {
    if basis.ncols() > 0 && basis.nrows() != n {
        return Err(FactorError::BasisDimension { got: basis.nrows(), n });
    }
    let gram = basis.transpose() * basis;
    let dev = (gram - DMatrix::identity(basis.ncols(), basis.ncols())).amax();
    if dev > 1e-8 {
        return Err(FactorError::NotOrthonormal(dev));
    }
    Ok(())
}

/// Samples `a`-factors until one satisfies
/// `sup_{v ∈ span(U), ‖v‖=1} |v⊺(A_H − (a/d)A_G)v| ≤ 7√d`.
///
/// Trial `i` draws from substream `i` of a seed taken from `rng`; the
/// lowest accepted index wins, whatever the thread count.
pub fn select_concentrated_factor(
    sampler: &FactorSampler,
    a: usize,
    basis: &DMatrix<f64>,
    max_trials: usize,
    rng: &mut Stream,
) -> Result<Selection, FactorError> {
    check_orthonormal(basis, sampler.base().n())?;
    select_with_compression(sampler, a, basis, max_trials, rng)
}

/// As [`select_concentrated_factor`] for an arbitrary `n × r` matrix `B`:
/// the rows of a global orthonormal basis restricted to one layer.
pub fn select_with_compression(
    sampler: &FactorSampler,
    a: usize,
    basis: &DMatrix<f64>,
    max_trials: usize,
    rng: &mut Stream,
) -> Result<Selection, FactorError> {
    let n = sampler.base().n();
    if basis.ncols() > 0 && basis.nrows() != n {
        return Err(FactorError::BasisDimension { got: basis.nrows(), n });
    }
    let seed = rng.next_u64();
    let bound = 7.0 * (sampler.degree() as f64).sqrt();
    let mut best = f64::INFINITY;
    let mut start = 0;
    while start < max_trials {
        let end = (start + BATCH).min(max_trials);
        let batch: Vec<Result<(FactorSample, f64), FactorError>> = (start..end)
            .into_par_iter()
            .map(|i| {
                let s = sampler.sample(a, &mut substream(seed, i as u64))?;
                let value = compression_norm(&s, basis);
                Ok((s, value))
            })
            .collect();
        for (offset, r) in batch.into_iter().enumerate() {
            let (sample, value) = r?;
            if value <= bound {
                return Ok(Selection {
                    sample,
                    value,
                    bound,
                    trials: start + offset + 1,
                });
            }
            best = best.min(value);
        }
        start = end;
    }
    Err(FactorError::BudgetExhausted {
        trials: max_trials,
        best,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub t: f64,
    pub threshold: f64,
    pub exceed: usize,
    pub frequency: f64,
    /// `2 (log₂ d) e^{−t²/2}`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub n: usize,
    pub d: usize,
    pub a: usize,
    pub samples: usize,
    /// `(2+√2)√(d n ⌈log₂ n⌉) ‖u‖_∞ ‖v‖_∞`; thresholds are `t` times this.
    pub scale: f64,
    pub max_statistic: f64,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    pub fn within_bound(&self) -> bool {
        self.rows.iter().all(|r| r.frequency <= r.bound)
    }

    pub fn to_section(&self, name: &str) -> Section {
        let mut s = Section::new(name);
        s.push("n", self.n)
            .push("d", self.d)
            .push("a", self.a)
            .push("samples", self.samples)
            .push("scale", self.scale)
            .push("max_statistic", self.max_statistic)
            .push("t", self.rows.iter().map(|r| r.t).collect::<Vec<_>>())
            .push("exceed", self.rows.iter().map(|r| r.exceed).collect::<Vec<_>>())
            .push("frequency", self.rows.iter().map(|r| r.frequency).collect::<Vec<_>>())
            .push("bound", self.rows.iter().map(|r| r.bound).collect::<Vec<_>>())
            .push("within_bound", self.within_bound());
        s
    }
}

/// `u⊺(A_H − (a/d)A_G + M)v` for one sample.
pub fn bilinear_statistic(sample: &FactorSample, u: &[f64], v: &[f64]) -> f64 {
    let w = sample.centered_weights();
    sample
        .base
        .edges()
        .iter()
        .zip(&w)
        .map(|(&(x, y), &c)| c * (u[x] * v[y] + u[y] * v[x]))
        .sum()
}

/// Empirical tail of `|u⊺(A_H − (a/d)A_G + M)v|` against the concentration bound.
pub fn concentration_stats(
    sampler: &FactorSampler,
    a: usize,
    u: &[f64],
    v: &[f64],
    samples: usize,
    t_values: &[f64],
    rng: &mut Stream,
) -> Result<TailReport, FactorError> {
    let g = sampler.base();
    let (n, d) = (g.n(), sampler.degree());
    assert_eq!(u.len(), n, "u has the wrong length");
    assert_eq!(v.len(), n, "v has the wrong length");
    let seed = rng.next_u64();
    let stats: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = sampler.sample(a, &mut substream(seed, i as u64))?;
            Ok(bilinear_statistic(&s, u, v).abs())
        })
        .collect::<Result<_, FactorError>>()?;
    let sup = |x: &[f64]| x.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let scale = (2.0 + 2f64.sqrt()) * ((d * n * ceil_log2(n)) as f64).sqrt() * sup(u) * sup(v);
    let log_d = if d == 0 { 0.0 } else { (d as f64).log2() };
    let rows = t_values
        .iter()
        .map(|&t| {
            let threshold = t * scale;
            let exceed = stats.iter().filter(|&&s| s > threshold).count();
            TailRow {
                t,
                threshold,
                exceed,
                frequency: if samples == 0 { 0.0 } else { exceed as f64 / samples as f64 },
                bound: 2.0 * log_d * (-t * t / 2.0).exp(),
            }
        })
        .collect();
    Ok(TailReport {
        n,
        d,
        a,
        samples,
        scale,
        max_statistic: stats.iter().copied().fold(0.0, f64::max),
        rows,
    })
}
