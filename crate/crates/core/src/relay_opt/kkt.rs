//! Optimality certificate for a computed relay input.
//!
//! At an optimum there are `xi` in `[0, 1]`, `lambda2 >= 0` and `nu` with
//!
//! ```text
//! r(x) = xi G(x) + (1 - xi) I'(x) - lambda2 x^2 - nu   = 0 on the support
//!                                                      <= 0 elsewhere
//! ```
//!
//! where `G` and `I'` are the marginal source-relay and relay-destination
//! rates of a mass placed at amplitude `x`. The multipliers are fitted by
//! mass-weighted least squares on the support and the residuals checked on
//! the solver grid.

use serde::{Deserialize, Serialize};

use super::kernel::RdKernel;
use super::{amplitude_grid, CapacityResult, Duplex, Regime, SolverConfig};
use crate::distribution::RelayInputDistribution;
use crate::error::{Error, Result};
use crate::linkbudget::NormalizedChannel;
use crate::numerics::linalg::Cholesky;
use crate::numerics::{normal_expectation, GaussianMixture, QuadratureSpec};
use crate::scalar::{awgn_capacity, gaussian_entropy, Real};
use crate::source_policy::allocated_power;

/// Relative slack below which the relay power constraint counts as active.
const ACTIVE_POWER: f64 = 1e-4;

/// Smallest mass held to the stationarity equation.
const SIGNIFICANT_MASS: f64 = 1e-6;

/// Complementary-slackness products; all vanish at an exact optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ComplementarySlackness<T: Real> {
    /// `xi (I_SR - C)`.
    pub rate_sr: T,
    /// `(1 - xi) (I_RD - C)`.
    pub rate_rd: T,
    /// `lambda2 (P_R - E[X^2])`.
    pub power: T,
    /// `lambda1 |allocated source power - P_S|`.
    pub source_power: T,
    /// `max p_j |r(x_j)|` over the support.
    pub mass: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct KktReport<T: Real> {
    /// Weight of the source-relay rate in the Lagrangian.
    pub xi: T,
    /// Multiplier of the source power identity.
    pub lambda1: T,
    /// Multiplier of the relay power constraint.
    pub lambda2: T,
    /// Multiplier of the normalization.
    pub nu: T,
    /// `max |r(x)|` over support points of non-negligible mass.
    pub stationarity_on_support: T,
    /// `max r(x)^+` over the remaining grid points.
    pub stationarity_off_support: T,
    pub stationarity_residual: T,
    pub complementary: ComplementarySlackness<T>,
    pub support_size: usize,
    /// Multipliers recovered from the barrier solve, when there was one.
    pub barrier_xi: Option<T>,
    pub barrier_lambda_power: Option<T>,
}

/// Weighted least squares `min sum_j w_j (sum_c theta_c cols[c][j] - rhs_j)^2`
/// via the normal equations.
fn lsq<T: Real>(cols: &[Vec<T>], rhs: &[T], w: &[T]) -> Option<Vec<T>> {
    let k = cols.len();
    if k == 0 {
        return Some(Vec::new());
    }
    if rhs.len() < k {
        return None;
    }
    let mut a = vec![T::zero(); k * k];
    let mut b = vec![T::zero(); k];
    for i in 0..k {
        for j in 0..k {
            a[i * k + j] = cols[i]
                .iter()
                .zip(&cols[j])
                .zip(w)
                .map(|((&u, &v), &wj)| wj * u * v)
                .sum();
        }
        b[i] = cols[i]
            .iter()
            .zip(rhs)
            .zip(w)
            .map(|((&u, &v), &wj)| wj * u * v)
            .sum();
    }
    Cholesky::factor(&a, k).ok().map(|c| c.solve(&b))
}

/// Fits `(xi, lambda2, nu)` to `xi a_j - lambda2 e_j - nu = -d_j` with the
/// sign constraints enforced by fixing violated multipliers at the bound.
/// Equation `j` has weight `w_j`.
fn fit_multipliers<T: Real>(
    a: &[T],
    e: &[T],
    d: &[T],
    w: &[T],
    power_active: bool,
    hint: Option<T>,
) -> (T, T, T) {
    let n = a.len();
    let ones = vec![-T::one(); n];
    let neg_e: Vec<T> = e.iter().map(|&v| -v).collect();
    let solve = |xi: Option<T>, with_power: bool| -> Option<(T, T, T)> {
        let mut cols = Vec::new();
        let mut rhs: Vec<T> = d.iter().map(|&v| -v).collect();
        match xi {
            Some(xi) => rhs.iter_mut().zip(a).for_each(|(r, &aj)| *r = *r - xi * aj),
            None => cols.push(a.to_vec()),
        }
        if with_power {
            cols.push(neg_e.clone());
        }
        cols.push(ones.clone());
        let theta = lsq(&cols, &rhs, w)?;
        let mut it = theta.into_iter();
        let xi = match xi {
            Some(v) => v,
            None => it.next()?,
        };
        let lambda2 = if with_power { it.next()? } else { T::zero() };
        Some((xi, lambda2, it.next()?))
    };
    let clamp = |v: T| v.max(T::zero()).min(T::one());
    let fallback_xi = hint.map(clamp).unwrap_or_else(|| T::lit(0.5));

    let mut with_power = power_active;
    let mut fit = solve(None, with_power).or_else(|| solve(Some(fallback_xi), with_power));
    for _ in 0..3 {
        let Some((xi, lambda2, _)) = fit else { break };
        if with_power && lambda2 < T::zero() {
            with_power = false;
            fit = solve(Some(xi).filter(|v| *v == clamp(*v)), false)
                .or_else(|| solve(Some(clamp(xi)), false));
            continue;
        }
        if xi != clamp(xi) {
            fit = solve(Some(clamp(xi)), with_power);
            continue;
        }
        break;
    }
    fit.or_else(|| solve(Some(fallback_xi), false))
        .unwrap_or((fallback_xi, T::zero(), T::zero()))
}

/// Marginal source-relay rate `G(x)` of the threshold policy.
fn marginal_sr<T: Real>(x: T, x_th: T, ch: &NormalizedChannel<T>) -> T {
    if x >= x_th {
        return T::zero();
    }
    let top = ch.sigma_r_sq + ch.alpha * x_th * x_th;
    let f = T::lit(0.5) * (top / (ch.sigma_r_sq + ch.alpha * x * x)).log2();
    let c = ch.alpha * (x_th * x_th - x * x);
    f - c * T::LOG2_E() * T::lit(0.5) / top
}

/// Certificate for a Gaussian relay input, which is optimal when the
/// relay-destination link binds (`xi = 0`). `I'(x)` is computed by
/// quadrature and `(lambda2, nu)` fitted on the grid.
fn gaussian_certificate<T: Real>(
    result: &CapacityResult<T>,
    ch: &NormalizedChannel<T>,
    cfg: &SolverConfig,
) -> Result<KktReport<T>> {
    let out = GaussianMixture::gaussian(T::zero(), ch.p_r + ch.sigma_d_sq)?;
    let q = QuadratureSpec {
        abs_tol: cfg.quadrature.abs_tol.min(1e-10),
        ..cfg.quadrature
    };
    let h_noise = gaussian_entropy(ch.sigma_d_sq);
    let x = amplitude_grid(ch.p_r, cfg);
    let mut d = Vec::with_capacity(x.len());
    for &xj in &x {
        let e = normal_expectation(|y| out.ln_density(y), xj, ch.sigma_d_sq, &[], &q)?;
        d.push(-e * T::LOG2_E() - T::LOG2_E() - h_noise);
    }
    let e: Vec<T> = x.iter().map(|&v| v * v).collect();
    let zeros = vec![T::zero(); x.len()];
    let (_, lambda2, nu) = fit_multipliers(
        &zeros,
        &e,
        &d,
        &vec![T::one(); x.len()],
        true,
        Some(T::zero()),
    );
    let worst = d
        .iter()
        .zip(&e)
        .map(|(&dj, &ej)| (dj - lambda2 * ej - nu).abs())
        .fold(T::zero(), T::max);
    Ok(KktReport {
        xi: T::zero(),
        lambda1: T::zero(),
        lambda2,
        nu,
        stationarity_on_support: worst,
        stationarity_off_support: T::zero(),
        stationarity_residual: worst,
        complementary: ComplementarySlackness {
            rate_sr: T::zero(),
            rate_rd: (result.mi_rd - result.capacity).abs(),
            power: lambda2 * (ch.p_r - result.dist.second_moment()).abs(),
            source_power: T::zero(),
            mass: T::zero(),
        },
        support_size: 0,
        barrier_xi: None,
        barrier_lambda_power: None,
    })
}

/// Checks the first-order optimality conditions of `result`.
pub fn kkt_certificate<T: Real>(
    result: &CapacityResult<T>,
    ch: &NormalizedChannel<T>,
    cfg: &SolverConfig,
) -> Result<KktReport<T>> {
    certificate(result, ch, cfg, None)
}

/// As [`kkt_certificate`], with a multiplier guess used when the support is
/// too small to determine `xi`.
pub(crate) fn certificate<T: Real>(
    result: &CapacityResult<T>,
    ch: &NormalizedChannel<T>,
    cfg: &SolverConfig,
    xi_hint: Option<T>,
) -> Result<KktReport<T>> {
    let points = match (&result.dist, result.regime) {
        (RelayInputDistribution::Gaussian { .. }, Regime::GaussianBottleneck) => {
            return gaussian_certificate(result, ch, cfg);
        }
        (RelayInputDistribution::Discrete { points }, _) => points,
        _ => return Err(Error::domain("no optimality certificate for this input")),
    };
    let support: Vec<_> = points.support().copied().collect();
    let grid = amplitude_grid(ch.p_r, cfg);
    // Kernel nodes: the support first, then grid points not on it.
    let mut x: Vec<T> = support.iter().map(|m| m.x).collect();
    let off: Vec<T> = grid
        .iter()
        .copied()
        .filter(|g| !support.iter().any(|m| m.x == *g))
        .collect();
    x.extend_from_slice(&off);
    let mut p = vec![T::zero(); x.len()];
    for (pj, m) in p.iter_mut().zip(&support) {
        *pj = m.p;
    }
    let kernel = RdKernel::new(&x, ch.sigma_d_sq, cfg.y_points_per_sigma);
    let d = kernel.gradient(&p);

    let inv_2ln2 = T::LOG2_E() * T::lit(0.5);
    let (g, kappa1): (Vec<T>, T) = match result.duplex {
        Duplex::Full => {
            let top = ch.sigma_r_sq + ch.alpha * result.x_th * result.x_th;
            (
                x.iter().map(|&v| marginal_sr(v, result.x_th, ch)).collect(),
                inv_2ln2 / top,
            )
        }
        Duplex::Half => {
            let snr = ch.p_s / ch.sigma_r_sq;
            let p0 = points.prob_zero();
            let g0 = if p0 > T::zero() {
                awgn_capacity(snr / p0) - snr * inv_2ln2 / (p0 + snr)
            } else {
                T::infinity()
            };
            (
                x.iter()
                    .map(|&v| if v == T::zero() { g0 } else { T::zero() })
                    .collect(),
                T::zero(),
            )
        }
    };

    let s = support.len();
    let e: Vec<T> = x.iter().map(|&v| v * v).collect();
    let a: Vec<T> = (0..s).map(|j| g[j] - d[j]).collect();
    let power_slack = ch.p_r - points.second_moment();
    let power_active = power_slack <= T::lit(ACTIVE_POWER) * ch.p_r;
    let w: Vec<T> = support.iter().map(|m| m.p).collect();
    let (xi, lambda2, nu) = fit_multipliers(&a, &e[..s], &d[..s], &w, power_active, xi_hint);

    let r: Vec<T> = (0..x.len())
        .map(|j| {
            let gj = if xi == T::zero() {
                T::zero()
            } else {
                xi * g[j]
            };
            gj + (T::one() - xi) * d[j] - lambda2 * e[j] - nu
        })
        .collect();
    // Masses below `SIGNIFICANT_MASS` are within the barrier's resolution of
    // zero and are held only to the one-sided condition.
    let significant = |j: usize| support[j].p >= T::lit(SIGNIFICANT_MASS);
    let on = (0..s)
        .filter(|&j| significant(j))
        .map(|j| r[j].abs())
        .fold(T::zero(), T::max);
    let off_max = (0..x.len())
        .filter(|&j| j >= s || !significant(j))
        .map(|j| r[j].max(T::zero()))
        .fold(T::zero(), T::max);
    let mass = r[..s]
        .iter()
        .zip(&support)
        .map(|(v, m)| v.abs() * m.p)
        .fold(T::zero(), T::max);
    let lambda1 = xi * kappa1;
    let source_power = match result.duplex {
        Duplex::Full => {
            lambda1 * (allocated_power(&result.dist, result.x_th, ch.alpha) - ch.p_s).abs()
        }
        Duplex::Half => T::zero(),
    };
    Ok(KktReport {
        xi,
        lambda1,
        lambda2,
        nu,
        stationarity_on_support: on,
        stationarity_off_support: off_max,
        stationarity_residual: on.max(off_max),
        complementary: ComplementarySlackness {
            rate_sr: xi * (result.mi_sr - result.capacity).abs(),
            rate_rd: (T::one() - xi) * (result.mi_rd - result.capacity).abs(),
            power: lambda2 * power_slack.abs(),
            source_power,
            mass,
        },
        support_size: s,
        barrier_xi: None,
        barrier_lambda_power: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit_is_recovered() {
        let e: Vec<f64> = (0..6).map(|j| (j as f64 * 0.4).powi(2)).collect();
        let a: Vec<f64> = (0..6).map(|j| (j as f64 * 0.9).sin()).collect();
        let (xi, l2, nu) = (0.3_f64, 0.7, -0.2);
        let d: Vec<f64> = (0..6).map(|j| -(xi * a[j] - l2 * e[j] - nu)).collect();
        let (fx, fl, fn_) = fit_multipliers(&a, &e, &d, &[1.0; 6], true, None);
        assert!((fx - xi).abs() < 1e-12 && (fl - l2).abs() < 1e-12 && (fn_ - nu).abs() < 1e-12);
    }

    #[test]
    fn negative_power_multiplier_is_dropped() {
        let e: Vec<f64> = (0..5).map(|j| j as f64).collect();
        let a = vec![0.0; 5];
        let d: Vec<f64> = e.iter().map(|&v| -v).collect();
        let (_, l2, _) = fit_multipliers(&a, &e, &d, &[1.0; 5], true, Some(0.0));
        assert_eq!(l2, 0.0);
    }
}
