use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkbudget::NormalizedChannel;
use crate::numerics::{gauss_expectation, QuadratureSpec};
use crate::scalar::{awgn_capacity, log2_1p, Real};
use crate::source_policy::solve_xth_gaussian;

/// Both sides of the Gaussian-bottleneck test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RegimeTest<T: Real> {
    /// The relay-destination link is the bottleneck under a Gaussian relay input.
    pub gaussian: bool,
    /// `log2(1 + p_r / sigma_d^2)`.
    pub rd_side: T,
    /// `E[log2(1 + alpha (x_th^2 - X^2)^+ / (sigma_r^2 + alpha X^2))]`, `X ~ N(0, p_r)`.
    pub sr_side: T,
    pub x_th: T,
}

/// Decides whether a Gaussian relay input is optimal.
///
/// Both sides are in `log2` without the factor one half; the factor is common
/// to both rates and does not affect the decision.
pub fn check_gaussian_regime<T: Real>(
    ch: &NormalizedChannel<T>,
    q: &QuadratureSpec,
) -> Result<RegimeTest<T>> {
    ch.validate()?;
    if !(ch.alpha > T::zero()) {
        return Err(Error::domain("the regime test needs alpha > 0"));
    }
    let x_th = solve_xth_gaussian(ch.p_r, ch.alpha, ch.p_s)?;
    let rd_side = log2_1p(ch.p_r / ch.sigma_d_sq);
    let (a, sr) = (ch.alpha, ch.sigma_r_sq);
    let rate = |x: T| log2_1p(a * (x_th * x_th - x * x).max(T::zero()) / (sr + a * x * x));
    let sr_side = if ch.p_r == T::zero() {
        rate(T::zero())
    } else {
        gauss_expectation(rate, ch.p_r, &[-x_th, x_th], q)?
    };
    Ok(RegimeTest {
        gaussian: rd_side <= sr_side,
        rd_side,
        sr_side,
        x_th,
    })
}

/// Capacity when the relay-destination link is the bottleneck.
pub fn capacity_gaussian_regime<T: Real>(p_r: T, sigma_d_sq: T) -> T {
    awgn_capacity(p_r / sigma_d_sq)
}
