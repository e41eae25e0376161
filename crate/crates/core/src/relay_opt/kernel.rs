//! Relay-destination mutual information on a fixed amplitude grid.
//!
//! The output density of a symmetric discrete input is even, so the entropy
//! integral is taken over `y >= 0` with the trapezoid rule at spacing
//! `sigma_d / k`. For a sum of Gaussians the rule converges geometrically in
//! the spacing; at eight points per standard deviation the error is at the
//! rounding level.

use crate::distribution::DiscreteDistribution;
use crate::scalar::{gaussian_entropy, Real};

/// Half-width of each kernel row in noise standard deviations.
const BAND_SIGMAS: f64 = 12.0;

/// Trapezoid nodes `y_k = k h` on `[0, y_max]` and their weights for the
/// even extension (`h` at the origin, `2h` elsewhere).
fn half_line_rule<T: Real>(y_max: T, h: T) -> (Vec<T>, Vec<T>) {
    let count = (y_max / h).ceil().to_usize().unwrap_or(0) + 1;
    let y: Vec<T> = (0..count).map(|k| h * T::lit(k as f64)).collect();
    let mut w = vec![T::lit(2.0) * h; count];
    w[0] = h;
    (y, w)
}

/// Density of `N(0, var)` evaluated at the pair `+-x`, averaged.
#[inline]
fn pair_density<T: Real>(y: T, x: T, inv_two_var: T, norm: T) -> T {
    let a = y - x;
    let b = y + x;
    T::lit(0.5) * norm * ((-a * a * inv_two_var).exp() + (-b * b * inv_two_var).exp())
}

/// Banded matrix `W[j][k]` of the output density of pair `j` at node `k`.
#[derive(Debug, Clone)]
pub(crate) struct RdKernel<T> {
    weights: Vec<T>,
    rows: Vec<(usize, Vec<T>)>,
    h_noise: T,
}

impl<T: Real> RdKernel<T> {
    pub(crate) fn new(x: &[T], sigma_d_sq: T, points_per_sigma: usize) -> Self {
        let sd = sigma_d_sq.sqrt();
        let h = sd / T::lit(points_per_sigma as f64);
        let band = T::lit(BAND_SIGMAS) * sd;
        let x_max = x.iter().copied().fold(T::zero(), T::max);
        let (y, weights) = half_line_rule(x_max + band, h);
        let inv_two_var = T::one() / (T::lit(2.0) * sigma_d_sq);
        let norm = T::one() / (T::TAU() * sigma_d_sq).sqrt();
        let rows = x
            .iter()
            .map(|&xj| {
                let lo = ((xj - band).max(T::zero()) / h)
                    .floor()
                    .to_usize()
                    .unwrap_or(0);
                let hi = (((xj + band) / h).ceil().to_usize().unwrap_or(0)).min(y.len() - 1);
                let vals = (lo..=hi)
                    .map(|k| pair_density(y[k], xj, inv_two_var, norm))
                    .collect();
                (lo, vals)
            })
            .collect();
        Self {
            weights,
            rows,
            h_noise: gaussian_entropy(sigma_d_sq),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.rows.len()
    }

    /// Output density at every node.
    pub(crate) fn density(&self, p: &[T]) -> Vec<T> {
        let mut py = vec![T::zero(); self.weights.len()];
        for ((lo, vals), &pj) in self.rows.iter().zip(p) {
            if pj == T::zero() {
                continue;
            }
            for (acc, &w) in py[*lo..*lo + vals.len()].iter_mut().zip(vals) {
                *acc = *acc + pj * w;
            }
        }
        py
    }

    /// `I(p) = h(Y) - h(N) * sum p`, in bits. Equals the mutual information
    /// whenever `p` sums to one.
    pub(crate) fn value(&self, p: &[T]) -> T {
        let py = self.density(p);
        let mass: T = p.iter().copied().sum();
        self.entropy_from_density(&py) - self.h_noise * mass
    }

    fn entropy_from_density(&self, py: &[T]) -> T {
        let mut h = T::zero();
        for (&d, &w) in py.iter().zip(&self.weights) {
            if d > T::zero() {
                h = h - w * d * d.log2();
            }
        }
        h
    }

    fn gradient_from_density(&self, py: &[T], grad: &mut [T]) {
        let tiny = T::min_positive_value();
        let inv_ln2 = T::LOG2_E();
        for (j, (lo, vals)) in self.rows.iter().enumerate() {
            let mut gj = T::zero();
            for (i, &v) in vals.iter().enumerate() {
                gj = gj + self.weights[lo + i] * v * (py[lo + i].max(tiny).log2() + inv_ln2);
            }
            grad[j] = -gj - self.h_noise;
        }
    }

    /// Gradient of [`Self::value`]: `-E[log2 p(Y) | x_j] - 1/ln 2 - h(N)`.
    pub(crate) fn gradient(&self, p: &[T]) -> Vec<T> {
        let mut grad = vec![T::zero(); self.len()];
        self.gradient_from_density(&self.density(p), &mut grad);
        grad
    }

    /// Value, gradient and (dense, row-major) Hessian of [`Self::value`].
    pub(crate) fn value_grad_hess(&self, p: &[T], grad: &mut [T], hess: &mut [T]) -> T {
        let n = self.len();
        let py = self.density(p);
        let tiny = T::min_positive_value();
        let inv_ln2 = T::LOG2_E();
        let mass: T = p.iter().copied().sum();
        let value = self.entropy_from_density(&py) - self.h_noise * mass;
        self.gradient_from_density(&py, grad);

        // r[j][k] = w_k W_jk / p(y_k), on row j's band.
        let scaled: Vec<Vec<T>> = self
            .rows
            .iter()
            .map(|(lo, vals)| {
                vals.iter()
                    .enumerate()
                    .map(|(i, &v)| self.weights[lo + i] * v / py[lo + i].max(tiny))
                    .collect()
            })
            .collect();

        for j in 0..n {
            let (lo_j, rj) = (self.rows[j].0, &scaled[j]);
            let hi_j = lo_j + rj.len();
            for l in j..n {
                let (lo_l, ref vl) = self.rows[l];
                let hi_l = lo_l + vl.len();
                let a = lo_j.max(lo_l);
                let b = hi_j.min(hi_l);
                let mut s = T::zero();
                if a < b {
                    for k in a..b {
                        s = s + rj[k - lo_j] * vl[k - lo_l];
                    }
                }
                let hjl = -inv_ln2 * s;
                hess[j * n + l] = hjl;
                hess[l * n + j] = hjl;
            }
        }
        value
    }
}

/// `I(X_R; Y_D)` in bits for a discrete input, by the half-line trapezoid rule.
pub fn discrete_mi_rd<T: Real>(
    dist: &DiscreteDistribution<T>,
    sigma_d_sq: T,
    points_per_sigma: usize,
) -> T {
    let support: Vec<_> = dist.support().copied().collect();
    let x: Vec<T> = support.iter().map(|m| m.x).collect();
    let p: Vec<T> = support.iter().map(|m| m.p).collect();
    let kernel = RdKernel::new(&x, sigma_d_sq, points_per_sigma);
    kernel.value(&p).max(T::zero())
}
