//! Dense integer matrices and exact rank by fraction-free elimination.

use num_bigint::BigInt;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) as f64)
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Evaluates `p(A)` for a square matrix, coefficients leading-first.
    /// Panics on `i64` overflow.
    pub fn eval_poly(&self, coeffs: &[i64]) -> IntMatrix {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        // Horner: P = ((c0 A + c1 I) A + c2 I) ...
        let mut acc = IntMatrix::zeros(n, n);
        for (k, &c) in coeffs.iter().enumerate() {
            if k > 0 {
                acc = acc.mul(self);
            }
            for i in 0..n {
                let v = acc.get(i, i).checked_add(c).expect("overflow in eval_poly");
                acc.set(i, i, v);
            }
        }
        acc
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b != 0 {
                        let idx = i * out.cols + j;
                        out.data[idx] = a
                            .checked_mul(b)
                            .and_then(|p| out.data[idx].checked_add(p))
                            .expect("overflow in IntMatrix::mul");
                    }
                }
            }
        }
        out
    }

    /// Exact rank over the rationals.
    pub fn rank(&self) -> usize {
        if let Some(r) = bareiss_rank_i128(self) {
            return r;
        }
        bareiss_rank_big(self)
    }

    /// Exact nullity (dimension of the right kernel) over the rationals.
    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }
}

/// Fraction-free Gaussian elimination on `i128`; `None` on overflow.
fn bareiss_rank_i128(m: &IntMatrix) -> Option<usize> {
    let (rows, cols) = (m.rows, m.cols);
    let mut a: Vec<i128> = m.data.iter().map(|&x| x.into()).collect();
    let mut prev: i128 = 1;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i * cols + c] != 0) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                a.swap(p * cols + j, r * cols + j);
            }
        }
        let piv = a[r * cols + c];
        for i in r + 1..rows {
            let f = a[i * cols + c];
            for j in c + 1..cols {
                let x = piv.checked_mul(a[i * cols + j])?;
                let y = f.checked_mul(a[r * cols + j])?;
                a[i * cols + j] = x.checked_sub(y)? / prev;
            }
            a[i * cols + c] = 0;
        }
        prev = piv;
        r += 1;
    }
    Some(r)
}

fn bareiss_rank_big(m: &IntMatrix) -> usize {
    let (rows, cols) = (m.rows, m.cols);
    let mut a: Vec<BigInt> = m.data.iter().map(|&x| BigInt::from(x)).collect();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i * cols + c].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                a.swap(p * cols + j, r * cols + j);
            }
        }
        let piv = a[r * cols + c].clone();
        for i in r + 1..rows {
            let f = a[i * cols + c].clone();
            if f.is_zero() {
                // the row still needs scaling by piv/prev to stay fraction-free
                for j in c + 1..cols {
                    let v = &piv * &a[i * cols + j];
                    a[i * cols + j] = v / &prev;
                }
                continue;
            }
            for j in c + 1..cols {
                let v = &piv * &a[i * cols + j] - &f * &a[r * cols + j];
                a[i * cols + j] = v / &prev;
            }
            a[i * cols + c] = BigInt::zero();
        }
        prev = piv;
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(IntMatrix::identity(4).rank(), 4);
        assert_eq!(IntMatrix::zeros(3, 5).rank(), 0);
        let m = IntMatrix::from_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        assert_eq!(m.nullity(), 1);
    }

    #[test]
    fn bigint_path_agrees_with_i128() {
        let rows: Vec<Vec<i64>> = (0..7)
            .map(|i| (0..7).map(|j| ((i * 7 + j) * 2654435761u64 as i64 % 97) - 48).collect())
            .collect();
        let m = IntMatrix::from_rows(&rows);
        assert_eq!(bareiss_rank_i128(&m), Some(bareiss_rank_big(&m)));
    }

    #[test]
    fn huge_entries_fall_back_to_bigint() {
        let big = 2_000_000_000_000_000_000i64;
        let m = IntMatrix::from_rows(&[
            vec![big, big - 1, 7, 1],
            vec![big - 3, big, 1, 5],
            vec![2 * big - 3, 2 * big - 1, 8, 6],
            vec![1, 2, 3, big],
        ]);
        assert_eq!(bareiss_rank_i128(&m), None);
        assert_eq!(m.rank(), 3);
    }

    #[test]
    fn poly_eval_matches_manual() {
        let a = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        // A^2 + 2A - 3I
        let p = a.eval_poly(&[1, 2, -3]);
        assert_eq!(p, IntMatrix::from_rows(&[vec![-2, 2], vec![2, -2]]));
        assert_eq!(p.nullity(), 1);
    }
}
