//! Reference schemes: ideal full duplex, full duplex with a Gaussian relay
//! input and constant source power, and time-shared half duplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkbudget::NormalizedChannel;
use crate::numerics::{gauss_expectation, golden_max, QuadratureSpec};
use crate::relay_opt::{hd_capacity, SolverConfig};
use crate::scalar::{awgn_capacity, Real};

const T_EDGE: f64 = 1e-6;
const ARG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BenchmarkSuite<T: Real> {
    pub c_fd_ideal: T,
    pub r_fd_conv: T,
    pub c_hd: T,
    pub r_hd_conv: T,
    /// Fraction of time the half-duplex relay transmits.
    pub t_opt: T,
    /// Relay power chosen by the conventional full-duplex scheme.
    pub p_r_opt_conv: T,
}

/// Two-hop capacity without self-interference.
pub fn ideal_fd_capacity<T: Real>(ch: &NormalizedChannel<T>) -> T {
    awgn_capacity(ch.p_s / ch.sigma_r_sq).min(awgn_capacity(ch.p_r / ch.sigma_d_sq))
}

/// Source-relay rate with relay input `N(0, p_r)` treated as noise.
fn conventional_sr<T: Real>(ch: &NormalizedChannel<T>, p_r: T, q: &QuadratureSpec) -> Result<T> {
    let rate = |x: T| awgn_capacity(ch.p_s / (ch.sigma_r_sq + ch.alpha * x * x));
    if p_r == T::zero() || ch.alpha == T::zero() {
        return Ok(rate(T::zero()));
    }
    gauss_expectation(rate, p_r, &[], q)
}

/// Full duplex with Gaussian relay signalling and the interference treated
/// as noise; returns the rate and the relay power that achieves it.
pub fn conventional_fd_rate<T: Real>(
    ch: &NormalizedChannel<T>,
    q: &QuadratureSpec,
) -> Result<(T, T)> {
    ch.validate()?;
    if ch.p_r == T::zero() {
        return Ok((T::zero(), T::zero()));
    }
    let mut failure = None;
    let (p, r) = golden_max(
        |p: T| match conventional_sr(ch, p, q) {
            Ok(sr) => sr.min(awgn_capacity(p / ch.sigma_d_sq)),
            Err(e) => {
                failure.get_or_insert(e);
                T::neg_infinity()
            }
        },
        T::zero(),
        ch.p_r,
        T::lit(ARG_TOL) * ch.p_r,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok((r, p)),
    }
}

/// Rates of the receive and transmit phases when the relay transmits a
/// fraction `t` of the time.
fn hd_branches<T: Real>(ch: &NormalizedChannel<T>, t: T) -> (T, T) {
    let r = T::one() - t;
    (
        r * awgn_capacity(ch.p_s / (r * ch.sigma_r_sq)),
        t * awgn_capacity(ch.p_r / (t * ch.sigma_d_sq)),
    )
}

/// Time-shared half duplex; returns the rate and the transmit fraction.
pub fn conventional_hd_rate<T: Real>(ch: &NormalizedChannel<T>) -> Result<(T, T)> {
    ch.validate()?;
    if ch.p_s == T::zero() || ch.p_r == T::zero() {
        return Ok((T::zero(), T::lit(0.5)));
    }
    let edge = T::lit(T_EDGE);
    let (t, r) = golden_max(
        |t: T| {
            let (a, b) = hd_branches(ch, t);
            a.min(b)
        },
        edge,
        T::one() - edge,
        T::lit(ARG_TOL),
    );
    if !r.is_finite() {
        return Err(Error::domain("half-duplex rate is not finite"));
    }
    Ok((r, t))
}

/// All reference rates for one channel.
pub fn benchmark_suite<T: Real>(
    ch: &NormalizedChannel<T>,
    cfg: &SolverConfig,
) -> Result<BenchmarkSuite<T>> {
    let (r_fd_conv, p_r_opt_conv) = conventional_fd_rate(ch, &cfg.quadrature)?;
    let (r_hd_conv, t_opt) = conventional_hd_rate(ch)?;
    Ok(BenchmarkSuite {
        c_fd_ideal: ideal_fd_capacity(ch),
        r_fd_conv,
        c_hd: hd_capacity(ch, cfg)?.capacity,
        r_hd_conv,
        t_opt,
        p_r_opt_conv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(p_s: f64, p_r: f64, alpha: f64) -> NormalizedChannel<f64> {
        NormalizedChannel::new(p_s, p_r, 0.1, 0.1, alpha).unwrap()
    }

    #[test]
    fn ideal_is_min_of_links() {
        let c = ch(1.0, 1.0, 0.0);
        assert!((ideal_fd_capacity(&c) - awgn_capacity(10.0)).abs() < 1e-15);
        assert_eq!(ideal_fd_capacity(&ch(0.0, 1.0, 0.0)), 0.0);
    }

    #[test]
    fn conventional_fd_limits() {
        let q = QuadratureSpec::default();
        let c = ch(1.0, 2.0, 0.0);
        let (r, _) = conventional_fd_rate(&c, &q).unwrap();
        assert!((r - ideal_fd_capacity(&c)).abs() < 1e-9);
        let (r, _) = conventional_fd_rate(&ch(1.0, 1.0, 1e12), &q).unwrap();
        assert!(r < 1e-3, "{r}");
    }

    #[test]
    fn symmetric_half_duplex_splits_evenly() {
        let (r, t) = conventional_hd_rate(&ch(1.0, 1.0, 0.0)).unwrap();
        assert!((t - 0.5).abs() < 1e-8, "{t}");
        assert!((r - 0.5 * awgn_capacity(20.0)).abs() < 1e-9);
    }

    #[test]
    fn half_duplex_branches_balance() {
        let c = ch(3.0, 0.4, 0.0);
        let (_, t) = conventional_hd_rate(&c).unwrap();
        let (a, b) = hd_branches(&c, t);
        assert!((a - b).abs() < 1e-8, "{a} {b}");
    }

    #[test]
    fn free_destination_link() {
        // The transmit phase shrinks only logarithmically in the relay power.
        let (r, t) = conventional_hd_rate(&ch(1.0, 1e60, 0.0)).unwrap();
        assert!(t < 0.02, "{t}");
        assert!((r - awgn_capacity(10.0)).abs() < 0.05, "{r}");
    }
}
