//! Achievable rate with a Bernoulli-Gaussian relay input.
//!
//! The relay stays silent with probability `1 - q` and otherwise sends
//! `N(0, p_r_used / q)`. For each relay power the silence probability is
//! chosen so that both hops carry the same rate; the bound is the best such
//! rate over `p_r_used <= P_R`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::RelayInputDistribution;
use crate::error::{Error, Result};
use crate::linkbudget::NormalizedChannel;
use crate::numerics::{brent_root, golden_max, QuadratureSpec};
use crate::relay_opt::{mi_relay_destination, SolverConfig};
use crate::scalar::{awgn_capacity, Real};
use crate::source_policy::{allocated_power, mi_source_relay, solve_xth_bernoulli_gaussian};

const PR_GRID: usize = 64;
const PR_FLOOR: f64 = 1e-3;
const Q_FLOOR: f64 = 1e-6;
const Q_SCAN: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BernoulliGaussian<T: Real> {
    /// Probability that the relay transmits.
    pub q: T,
    /// Average relay power; the conditional variance is `p_r_used / q`.
    pub p_r_used: T,
}

impl<T: Real> BernoulliGaussian<T> {
    pub fn new(q: T, p_r_used: T) -> Result<Self> {
        if !(q > T::zero() && q <= T::one()) {
            return Err(Error::domain(format!("q must be in (0, 1], got {q}")));
        }
        if !(p_r_used >= T::zero() && p_r_used.is_finite()) {
            return Err(Error::domain(format!(
                "relay power must be nonnegative, got {p_r_used}"
            )));
        }
        Ok(Self { q, p_r_used })
    }

    pub fn distribution(&self) -> RelayInputDistribution<T> {
        RelayInputDistribution::BernoulliGaussian {
            q: self.q,
            p_r_used: self.p_r_used,
        }
    }

    pub fn threshold(&self, ch: &NormalizedChannel<T>) -> Result<T> {
        solve_xth_bernoulli_gaussian(self.q, self.p_r_used, ch.alpha, ch.p_s)
    }
}

/// Source-relay rate of the Bernoulli-Gaussian input at threshold `x_th`.
pub fn lb_mi_source_relay<T: Real>(
    bg: &BernoulliGaussian<T>,
    x_th: T,
    ch: &NormalizedChannel<T>,
    q: &QuadratureSpec,
) -> Result<T> {
    mi_source_relay(&bg.distribution(), x_th, ch.alpha, ch.sigma_r_sq, ch.p_s, q)
}

/// Relay-destination rate of the Bernoulli-Gaussian input.
pub fn lb_mi_relay_destination<T: Real>(
    bg: &BernoulliGaussian<T>,
    sigma_d_sq: T,
    q: &QuadratureSpec,
) -> Result<T> {
    if bg.q == T::one() {
        return Ok(awgn_capacity(bg.p_r_used / sigma_d_sq));
    }
    mi_relay_destination(&bg.distribution(), sigma_d_sq, q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LowerBound<T: Real> {
    pub rate: T,
    pub input: BernoulliGaussian<T>,
    pub x_th: T,
    pub mi_sr: T,
    pub mi_rd: T,
    /// `|allocated source power - p_s| / p_s`.
    pub power_residual: T,
    /// No balanced `q` existed for any relay power; `q = 1` was used.
    pub fallback: bool,
}

struct Point<T: Real> {
    input: BernoulliGaussian<T>,
    x_th: T,
    mi_sr: T,
    mi_rd: T,
}

impl<T: Real> Point<T> {
    fn rate(&self) -> T {
        self.mi_sr.min(self.mi_rd)
    }
}

fn evaluate<T: Real>(
    ch: &NormalizedChannel<T>,
    q: T,
    p_r: T,
    quad: &QuadratureSpec,
) -> Result<Point<T>> {
    let input = BernoulliGaussian::new(q, p_r)?;
    let x_th = input.threshold(ch)?;
    let mi_sr = lb_mi_source_relay(&input, x_th, ch, quad)?;
    let mi_rd = lb_mi_relay_destination(&input, ch.sigma_d_sq, quad)?;
    Ok(Point {
        input,
        x_th,
        mi_sr,
        mi_rd,
    })
}

/// Balanced point for one relay power, or `None` when the source-relay rate
/// is below the relay-destination rate for every `q`.
fn balanced<T: Real>(
    ch: &NormalizedChannel<T>,
    p_r: T,
    quad: &QuadratureSpec,
) -> Result<Option<Point<T>>> {
    let full = evaluate(ch, T::one(), p_r, quad)?;
    if full.mi_sr >= full.mi_rd {
        // The relay-destination link binds even with the relay always on.
        return Ok(Some(full));
    }
    let mut failure = None;
    let mut gap = |q: T| match evaluate(ch, q, p_r, quad) {
        Ok(pt) => pt.mi_sr - pt.mi_rd,
        Err(e) => {
            failure.get_or_insert(e);
            T::nan()
        }
    };
    let lo = T::lit(Q_FLOOR);
    let tol = T::lit(1e-13);
    let root = if gap(lo) > T::zero() {
        brent_root(&mut gap, lo, T::one(), tol).ok()
    } else {
        None
    };
    let root = match root {
        Some(r) => Some(r),
        None => {
            // Scan for the first sign change from a positive gap.
            let grid: Vec<T> = (0..Q_SCAN)
                .map(|k| lo + (T::one() - lo) * T::lit(k as f64 / (Q_SCAN - 1) as f64))
                .collect();
            let vals: Vec<T> = grid.iter().map(|&v| gap(v)).collect();
            let mut found = None;
            for k in 0..Q_SCAN - 1 {
                if vals[k] >= T::zero() && vals[k + 1] < T::zero() {
                    found = brent_root(&mut gap, grid[k], grid[k + 1], tol).ok();
                    break;
                }
            }
            found
        }
    };
    if let Some(e) = failure {
        return Err(e);
    }
    root.map(|q| evaluate(ch, q, p_r, quad)).transpose()
}

/// Best Bernoulli-Gaussian rate over the relay power.
pub fn solve_lowerbound<T: Real>(
    ch: &NormalizedChannel<T>,
    cfg: &SolverConfig,
) -> Result<LowerBound<T>> {
    ch.validate()?;
    cfg.validate()?;
    if !(ch.alpha > T::zero()) {
        return Err(Error::domain("the lower bound needs alpha > 0"));
    }
    let quad = &cfg.quadrature;
    let finish = |pt: Point<T>, fallback: bool| {
        let residual = if ch.p_s > T::zero() {
            (allocated_power(&pt.input.distribution(), pt.x_th, ch.alpha) - ch.p_s).abs() / ch.p_s
        } else {
            T::zero()
        };
        LowerBound {
            rate: pt.rate(),
            input: pt.input,
            x_th: pt.x_th,
            mi_sr: pt.mi_sr,
            mi_rd: pt.mi_rd,
            power_residual: residual,
            fallback,
        }
    };
    if ch.p_s == T::zero() || ch.p_r == T::zero() {
        return Ok(finish(evaluate(ch, T::one(), ch.p_r, quad)?, false));
    }

    let ratio = T::lit(PR_FLOOR);
    let grid: Vec<T> = (0..PR_GRID)
        .map(|k| ch.p_r * ratio.powf(T::one() - T::lit(k as f64 / (PR_GRID - 1) as f64)))
        .collect();
    let points: Vec<Option<Point<T>>> = grid
        .par_iter()
        .map(|&p| balanced(ch, p, quad))
        .collect::<Result<Vec<_>>>()?;
    let best = points
        .iter()
        .enumerate()
        .filter_map(|(k, pt)| pt.as_ref().map(|p| (k, p.rate())))
        .fold(None, |acc: Option<(usize, T)>, cur| match acc {
            Some(a) if a.1 >= cur.1 => Some(a),
            _ => Some(cur),
        });
    let Some((k, _)) = best else {
        return Ok(finish(evaluate(ch, T::one(), ch.p_r, quad)?, true));
    };

    // Golden refinement in log power between the neighbours of the best node.
    let lo = grid[k.saturating_sub(1)].ln();
    let hi = grid[(k + 1).min(PR_GRID - 1)].ln();
    let mut failure = None;
    let (arg, _) = golden_max(
        |lp: T| match balanced(ch, lp.exp().min(ch.p_r), quad) {
            Ok(Some(pt)) => pt.rate(),
            Ok(None) => T::neg_infinity(),
            Err(e) => {
                failure.get_or_insert(e);
                T::neg_infinity()
            }
        },
        lo,
        hi,
        T::lit(1e-7),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let refined = balanced(ch, arg.exp().min(ch.p_r), quad)?;
    let grid_best = points
        .into_iter()
        .nth(k)
        .flatten()
        .expect("best grid node is feasible");
    let pt = match refined {
        Some(r) if r.rate() >= grid_best.rate() => r,
        _ => grid_best,
    };
    Ok(finish(pt, false))
}
