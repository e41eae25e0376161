//! Dense symmetric positive-definite solves for the barrier Newton steps.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower-triangular Cholesky factor of a row-major `n x n` matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    /// Factors `a` (only the lower triangle is read).
    pub fn factor(a: &[T], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix shape mismatch");
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d = d - l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) {
                return Err(Error::domain(format!(
                    "matrix not positive definite at pivot {j}"
                )));
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = a[i * n + j];
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                for k in 0..j {
                    s = s - ri[k] * rj[k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Self { n, l })
    }

    /// Solves `A x = b` in place.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s = s - self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s = s - self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Solver for `K + V V^T` from a factor of `K` and a few columns `V`
/// (Woodbury identity). Large low-rank terms stay out of the factored matrix,
/// which keeps its condition number independent of their size.
#[derive(Debug, Clone)]
pub struct LowRankUpdate<T> {
    base: Cholesky<T>,
    cols: Vec<Vec<T>>,
    /// `K^-1 V`, one vector per column.
    kinv_cols: Vec<Vec<T>>,
    capacitance: Cholesky<T>,
}

impl<T: Real> LowRankUpdate<T> {
    pub fn new(base: Cholesky<T>, cols: Vec<Vec<T>>) -> Result<Self> {
        let r = cols.len();
        let kinv_cols: Vec<Vec<T>> = cols.iter().map(|c| base.solve(c)).collect();
        let mut cap = vec![T::zero(); r * r];
        for i in 0..r {
            for j in 0..r {
                let dot: T = cols[i]
                    .iter()
                    .zip(&kinv_cols[j])
                    .map(|(&a, &b)| a * b)
                    .sum();
                cap[i * r + j] = dot + if i == j { T::one() } else { T::zero() };
            }
        }
        let capacitance = Cholesky::factor(&cap, r)?;
        Ok(Self {
            base,
            cols,
            kinv_cols,
            capacitance,
        })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = self.base.solve(b);
        if self.cols.is_empty() {
            return x;
        }
        let proj: Vec<T> = self
            .cols
            .iter()
            .map(|c| c.iter().zip(&x).map(|(&a, &b)| a * b).sum())
            .collect();
        let coef = self.capacitance.solve(&proj);
        for (zc, &cf) in self.kinv_cols.iter().zip(&coef) {
            x.iter_mut().zip(zc).for_each(|(xi, &z)| *xi = *xi - cf * z);
        }
        x
    }
}
