//! Symbol-dependent source power allocation.
//!
//! Given the relay symbol `x_R`, the source sends Gaussian codewords of power
//! `alpha * max(0, x_th^2 - x_R^2)`: it is silent whenever the interference
//! from the relay is too strong, and otherwise fills the gap up to a common
//! level `alpha * x_th^2`. The threshold is set so the average power is `P_S`.

use serde::{Deserialize, Serialize};

use crate::distribution::{DiscreteDistribution, RelayInputDistribution};
use crate::error::{Error, Result};
use crate::numerics::{bisect_root, erf, gauss_expectation, QuadratureSpec};
use crate::scalar::{awgn_capacity, Real};

/// Threshold policy of the source. `alpha == 0` means constant power
/// `p_s` and an infinite threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SourcePolicy<T: Real> {
    pub x_th: T,
    pub alpha: T,
    pub p_s: T,
}

impl<T: Real> SourcePolicy<T> {
    /// Solves the threshold for `dist` and builds the policy.
    pub fn for_distribution(dist: &RelayInputDistribution<T>, alpha: T, p_s: T) -> Result<Self> {
        let x_th = solve_xth(dist, alpha, p_s)?;
        Ok(Self { x_th, alpha, p_s })
    }

    /// Probability that the source transmits, `Pr{|X_R| < x_th}`.
    pub fn transmit_probability(&self, dist: &RelayInputDistribution<T>) -> T {
        transmit_probability(dist, self.x_th)
    }
}

/// Source power in the state `x_r`.
pub fn source_power<T: Real>(x_r: T, policy: &SourcePolicy<T>) -> T {
    if policy.alpha == T::zero() {
        return policy.p_s;
    }
    policy.alpha * (policy.x_th * policy.x_th - x_r * x_r).max(T::zero())
}

fn check_inputs<T: Real>(alpha: T, p_s: T) -> Result<()> {
    if !(alpha >= T::zero()) || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "alpha must be finite and nonnegative, got {alpha}"
        )));
    }
    if !(p_s >= T::zero()) || !p_s.is_finite() {
        return Err(Error::domain(format!(
            "source power must be finite and nonnegative, got {p_s}"
        )));
    }
    Ok(())
}

/// Threshold for a discrete relay input.
///
/// The average allocated power is piecewise quadratic in `x_th` with knots at
/// the support amplitudes, so the root is found exactly: on the segment where
/// the active set is `{x_j < x_th}` with mass `A` and second moment `B`,
/// `x_th = sqrt((p_s / alpha + B) / A)`.
pub fn solve_xth_discrete<T: Real>(dist: &DiscreteDistribution<T>, alpha: T, p_s: T) -> Result<T> {
    check_inputs(alpha, p_s)?;
    if alpha == T::zero() {
        return Ok(T::infinity());
    }
    let support: Vec<_> = dist.support().copied().collect();
    if p_s == T::zero() {
        return Ok(support[0].x);
    }
    let level = p_s / alpha;
    let mut mass = T::zero();
    let mut moment = T::zero();
    for (k, m) in support.iter().enumerate() {
        mass = mass + m.p;
        moment = moment + m.p * m.x * m.x;
        let x_th = ((level + moment) / mass).sqrt();
        if k + 1 == support.len() || x_th <= support[k + 1].x {
            return Ok(x_th);
        }
    }
    unreachable!("the last segment always accepts the root")
}

/// `E[alpha * max(0, x^2 - X^2)]` for `X ~ N(0, v)`, in closed form.
pub fn gaussian_allocated_power<T: Real>(x: T, v: T, alpha: T) -> T {
    if v == T::zero() {
        return alpha * x * x;
    }
    let two = T::lit(2.0);
    let e = (-x * x / (two * v)).exp();
    let s = erf(x / (two * v).sqrt());
    (two * v / T::PI()).sqrt() * alpha * x * e + alpha * (x * x - v) * s
}

/// Derivative of [`gaussian_allocated_power`] in `x`.
fn gaussian_allocated_power_dx<T: Real>(x: T, v: T, alpha: T) -> T {
    if v == T::zero() {
        return T::lit(2.0) * alpha * x;
    }
    T::lit(2.0) * alpha * x * erf(x / (T::lit(2.0) * v).sqrt())
}

/// Bisection on a bracket known to contain the root of the monotone `lhs - p_s`,
/// then a few safeguarded Newton steps.
fn solve_monotone<T: Real>(
    lhs: impl Fn(T) -> T,
    dlhs: impl Fn(T) -> T,
    lo: T,
    hi: T,
    p_s: T,
) -> Result<T> {
    if lhs(lo) >= p_s {
        return Ok(lo);
    }
    if lhs(hi) <= p_s {
        return Ok(hi);
    }
    let coarse = (hi - lo) * T::lit(1e-6) + T::min_positive_value();
    let mut x = bisect_root(|x| lhs(x) - p_s, lo, hi, coarse)?;
    for _ in 0..50 {
        let r = lhs(x) - p_s;
        let d = dlhs(x);
        if !(d > T::zero()) {
            break;
        }
        let next = (x - r / d).max(lo).min(hi);
        let done = (next - x).abs() <= T::epsilon() * T::lit(4.0) * x.abs();
        x = next;
        if done {
            break;
        }
    }
    Ok(x)
}

/// Threshold when the relay input is `N(0, p_r)`.
pub fn solve_xth_gaussian<T: Real>(p_r: T, alpha: T, p_s: T) -> Result<T> {
    solve_xth_bernoulli_gaussian(T::one(), p_r, alpha, p_s)
}

/// Threshold for the Bernoulli-Gaussian input: zero with probability `1 - q`,
/// `N(0, p_r_used / q)` otherwise.
pub fn solve_xth_bernoulli_gaussian<T: Real>(q: T, p_r_used: T, alpha: T, p_s: T) -> Result<T> {
    check_inputs(alpha, p_s)?;
    if !(q > T::zero() && q <= T::one()) {
        return Err(Error::domain(format!(
            "transmit probability must be in (0, 1], got {q}"
        )));
    }
    if !(p_r_used >= T::zero()) {
        return Err(Error::domain(format!(
            "relay power must be nonnegative, got {p_r_used}"
        )));
    }
    if alpha == T::zero() {
        return Ok(T::infinity());
    }
    let base = (p_s / alpha).sqrt();
    if p_s == T::zero() || p_r_used == T::zero() {
        return Ok(base);
    }
    let v = p_r_used / q;
    let one_q = T::one() - q;
    let lhs = |x: T| q * gaussian_allocated_power(x, v, alpha) + one_q * alpha * x * x;
    let dlhs =
        |x: T| q * gaussian_allocated_power_dx(x, v, alpha) + T::lit(2.0) * one_q * alpha * x;
    // alpha (x^2 - E X^2) <= lhs(x) <= alpha x^2 brackets the root.
    let hi = (p_s / alpha + p_r_used).sqrt();
    solve_monotone(lhs, dlhs, base, hi, p_s)
}

/// Threshold for any relay input.
pub fn solve_xth<T: Real>(dist: &RelayInputDistribution<T>, alpha: T, p_s: T) -> Result<T> {
    match dist {
        RelayInputDistribution::Discrete { points } => solve_xth_discrete(points, alpha, p_s),
        RelayInputDistribution::Gaussian { variance } => solve_xth_gaussian(*variance, alpha, p_s),
        RelayInputDistribution::BernoulliGaussian { q, p_r_used } => {
            solve_xth_bernoulli_gaussian(*q, *p_r_used, alpha, p_s)
        }
    }
}

/// Average allocated source power `E[alpha max(0, x_th^2 - X_R^2)]`.
pub fn allocated_power<T: Real>(dist: &RelayInputDistribution<T>, x_th: T, alpha: T) -> T {
    match dist {
        RelayInputDistribution::Discrete { points } => points
            .support()
            .map(|m| alpha * (x_th * x_th - m.x * m.x).max(T::zero()) * m.p)
            .sum(),
        RelayInputDistribution::Gaussian { variance } => {
            gaussian_allocated_power(x_th, *variance, alpha)
        }
        RelayInputDistribution::BernoulliGaussian { q, p_r_used } => {
            let q = *q;
            q * gaussian_allocated_power(x_th, *p_r_used / q, alpha)
                + (T::one() - q) * alpha * x_th * x_th
        }
    }
}

/// `Pr{|X_R| < x_th}`.
pub fn transmit_probability<T: Real>(dist: &RelayInputDistribution<T>, x_th: T) -> T {
    if x_th == T::infinity() {
        return T::one();
    }
    let two = T::lit(2.0);
    match dist {
        RelayInputDistribution::Discrete { points } => points.mass_below(x_th),
        RelayInputDistribution::Gaussian { variance } => {
            if *variance == T::zero() {
                T::one()
            } else {
                erf(x_th / (two * *variance).sqrt())
            }
        }
        RelayInputDistribution::BernoulliGaussian { q, p_r_used } => {
            let v = *p_r_used / *q;
            let inner = if v == T::zero() {
                T::one()
            } else {
                erf(x_th / (two * v).sqrt())
            };
            T::one() - *q + *q * inner
        }
    }
}

/// Conditional rate `1/2 log2(1 + alpha (x_th^2 - x^2)^+ / (sigma_r_sq + alpha x^2))`.
#[inline]
pub fn state_rate<T: Real>(x: T, x_th: T, alpha: T, sigma_r_sq: T) -> T {
    let p = (x_th * x_th - x * x).max(T::zero());
    awgn_capacity(alpha * p / (sigma_r_sq + alpha * x * x))
}

/// Source-relay mutual information `I(X_S; Y_R | X_R)` under the threshold
/// policy, in bits per symbol.
pub fn mi_source_relay<T: Real>(
    dist: &RelayInputDistribution<T>,
    x_th: T,
    alpha: T,
    sigma_r_sq: T,
    p_s: T,
    q: &QuadratureSpec,
) -> Result<T> {
    if alpha == T::zero() {
        return Ok(awgn_capacity(p_s / sigma_r_sq));
    }
    let gaussian_part = |v: T| {
        if v == T::zero() {
            return Ok(state_rate(T::zero(), x_th, alpha, sigma_r_sq));
        }
        gauss_expectation(
            |x| state_rate(x, x_th, alpha, sigma_r_sq),
            v,
            &[-x_th, x_th],
            q,
        )
    };
    match dist {
        RelayInputDistribution::Discrete { points } => Ok(points
            .support()
            .map(|m| m.p * state_rate(m.x, x_th, alpha, sigma_r_sq))
            .sum()),
        RelayInputDistribution::Gaussian { variance } => gaussian_part(*variance),
        RelayInputDistribution::BernoulliGaussian { q: w, p_r_used } => {
            let g = gaussian_part(*p_r_used / *w)?;
            Ok(*w * g + (T::one() - *w) * state_rate(T::zero(), x_th, alpha, sigma_r_sq))
        }
    }
}
