//! Log-barrier interior-point method for
//!
//! ```text
//! maximize u  subject to  u <= g(p),  u <= I(p),  p > 0,  sum p = 1,  sum x_j^2 p_j <= P_R
//! ```
//!
//! `g` and `I` are concave, so the problem is a convex program. The epigraph
//! variable `u` is minimized out of the barrier in closed form, and each
//! centering step is a Newton iteration on the remaining barrier with the
//! equality constraint eliminated through its Schur complement. The Hessian
//! terms that grow like `t^2` have rank one and are applied through the
//! Woodbury identity rather than factored.

use super::kernel::RdKernel;
use super::objective::SourceObjective;
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::numerics::linalg::{Cholesky, LowRankUpdate};
use crate::scalar::Real;

/// Newton decrement below which centering stops.
const CENTERING_TOL: f64 = 1e-9;
const T_GROWTH: f64 = 10.0;
/// Newton decrement below which full steps are taken without a descent test;
/// at large `t` the barrier value itself is too large for a meaningful
/// sufficient-decrease comparison in floating point.
const QUADRATIC_REGION: f64 = 0.25;

#[derive(Debug, Clone)]
pub(crate) struct BarrierOutcome<T> {
    pub p: Vec<T>,
    pub newton_steps: usize,
    pub outer_steps: usize,
    pub duality_gap: T,
    pub centered: bool,
    /// Multiplier of `u <= g`; the multiplier of `u <= I` is its complement.
    pub xi_sr: T,
    /// Multiplier of the power constraint.
    pub lambda_power: T,
}

struct Problem<'a, T> {
    obj: &'a SourceObjective<T>,
    kernel: &'a RdKernel<T>,
    e: Vec<T>,
    p_r: T,
}

/// Slacks of the rate epigraphs and the power constraint at the optimal `u`.
struct Slacks<T> {
    g: T,
    i: T,
    power: T,
}

/// Minimizer over `u` of `-t u - ln(a - u) - ln(b - u)`, returned as the
/// slacks `(a - u, b - u)`: the positive root of `t s (s + D) = 2 s + D`
/// for the smaller slack `s`, `D = |a - b|`.
fn epigraph_slacks<T: Real>(a: T, b: T, t: T) -> (T, T) {
    let two = T::lit(2.0);
    let d = (a - b).abs();
    let lin = t * d - two;
    let disc = (lin * lin + T::lit(4.0) * t * d).sqrt();
    let s = if lin > T::zero() {
        two * d / (lin + disc)
    } else {
        (disc - lin) / (two * t)
    };
    if a <= b {
        (s, s + d)
    } else {
        (s + d, s)
    }
}

impl<T: Real> Problem<'_, T> {
    fn power_slack(&self, p: &[T]) -> T {
        self.p_r - self.e.iter().zip(p).map(|(&a, &b)| a * b).sum::<T>()
    }

    fn slacks(&self, p: &[T], t: T) -> Option<Slacks<T>> {
        if p.iter().any(|&v| !(v > T::zero())) {
            return None;
        }
        let power = self.power_slack(p);
        if !(power > T::zero()) {
            return None;
        }
        let (g, i) = epigraph_slacks(self.obj.value(p), self.kernel.value(p), t);
        Some(Slacks { g, i, power })
    }

    /// Barrier with `u` minimized out, shifted by `t min(g, I)` so the value
    /// stays of order one.
    fn barrier(&self, p: &[T], t: T) -> Option<T> {
        let s = self.slacks(p, t)?;
        let logs: T = p.iter().map(|v| v.ln()).sum();
        let (a, b) = (self.obj.value(p), self.kernel.value(p));
        Some(-t * (a.min(b) - s.g.min(s.i)) - s.g.ln() - s.i.ln() - s.power.ln() - logs)
    }

    /// Newton step for the reduced barrier restricted to `sum p = 1`, with
    /// the decrement and the slacks at `p`.
    fn newton_step(&self, p: &[T], t: T) -> Result<(Vec<T>, T, Slacks<T>)> {
        let n = p.len();
        let ge = self.obj.eval(p);
        let mut ig = vec![T::zero(); n];
        let mut ih = vec![T::zero(); n * n];
        let iv = self.kernel.value_grad_hess(p, &mut ig, &mut ih);
        let (dg, di) = epigraph_slacks(ge.value, iv, t);
        let power = self.power_slack(p);

        // Gradient by the envelope theorem.
        let grad: Vec<T> = (0..n)
            .map(|j| -ge.grad[j] / dg - ig[j] / di - T::one() / p[j] + self.e[j] / power)
            .collect();

        // Hessian = K + sum of three rank-one terms. K keeps the parts whose
        // scale does not grow like t^2.
        let inv_di = T::one() / di;
        let mut k = vec![T::zero(); n * n];
        for j in 0..n {
            for l in 0..n {
                k[j * n + l] = -ih[j * n + l] * inv_di;
            }
            k[j * n + j] = k[j * n + j] + T::one() / (p[j] * p[j]);
        }
        let base = Cholesky::factor(&k, n)?;
        let pair = (dg * dg + di * di).sqrt();
        let sqrt_dg = dg.sqrt();
        let cols = vec![
            (0..n).map(|j| (ge.grad[j] - ig[j]) / pair).collect(),
            self.e.iter().map(|&v| v / power).collect(),
            ge.curv.iter().map(|&c| c / sqrt_dg).collect(),
        ];
        let solver = LowRankUpdate::new(base, cols)?;
        let hg = solver.solve(&grad);
        let ha = solver.solve(&vec![T::one(); n]);
        let w = hg.iter().copied().sum::<T>() / ha.iter().copied().sum::<T>();
        let step: Vec<T> = hg.iter().zip(&ha).map(|(&a, &b)| -(a - w * b)).collect();
        let decrement = -grad.iter().zip(&step).map(|(&a, &b)| a * b).sum::<T>();
        Ok((
            step,
            decrement,
            Slacks {
                g: dg,
                i: di,
                power,
            },
        ))
    }
}

/// Strictly feasible start: a discretized Gaussian of power `p_r` blended
/// with a little uniform mass, pulled toward zero if it overshoots the power.
fn initial_masses<T: Real>(x: &[T], p_r: T) -> Vec<T> {
    let n = x.len();
    let mut p: Vec<T> = x.iter().map(|&v| (-v * v / p_r).exp()).collect();
    let s: T = p.iter().copied().sum();
    let mix = T::lit(0.005);
    let uniform = T::one() / T::lit(n as f64);
    p.iter_mut()
        .for_each(|v| *v = (T::one() - mix) * *v / s + mix * uniform);
    let power: T = x.iter().zip(&p).map(|(&a, &b)| a * a * b).sum();
    let target = T::lit(0.5) * p_r;
    if power > target {
        let keep = target / power;
        p.iter_mut().for_each(|v| *v = *v * keep);
        p[0] = p[0] + (T::one() - keep);
    }
    p
}

pub(crate) fn solve<T: Real>(
    obj: &SourceObjective<T>,
    kernel: &RdKernel<T>,
    x: &[T],
    p_r: T,
    cfg: &SolverConfig,
) -> Result<BarrierOutcome<T>> {
    let n = x.len();
    let prob = Problem {
        obj,
        kernel,
        e: x.iter().map(|&v| v * v).collect(),
        p_r,
    };
    let mut p = initial_masses(x, p_r);
    if prob.slacks(&p, T::one()).is_none() {
        return Err(Error::Infeasible(
            "barrier start point is not strictly feasible".into(),
        ));
    }
    // Inequalities: n positivity, power, and the two rate epigraphs.
    let constraints = T::lit((n + 3) as f64);
    // Tolerances tighter than the working precision cannot be met.
    let gap_target = T::lit(cfg.tol_bits).max(T::lit(100.0) * T::epsilon());
    let centering_tol = T::lit(CENTERING_TOL).max(T::epsilon());
    let mut t = T::one();
    let mut newton_steps = 0;
    let mut outer_steps = 0;
    let mut centered = true;

    loop {
        outer_steps += 1;
        let mut this_centered = false;
        for _ in 0..cfg.max_inner {
            let (step, decrement, _) = prob.newton_step(&p, t)?;
            newton_steps += 1;
            if decrement * T::lit(0.5) <= centering_tol {
                this_centered = true;
                break;
            }

            // Fraction to the boundary for the positivity constraints.
            let mut s = T::one();
            for j in 0..n {
                if step[j] < T::zero() {
                    s = s.min(T::lit(0.99) * (-p[j] / step[j]));
                }
            }
            let trial =
                |s: T| -> Vec<T> { p.iter().zip(&step).map(|(&a, &b)| a + s * b).collect() };
            let damped = decrement >= T::lit(QUADRATIC_REGION);
            let phi0 = if damped { prob.barrier(&p, t) } else { None };
            let slope = -decrement;
            let mut accepted = None;
            while s > T::lit(1e-14) {
                let q = trial(s);
                let ok = match phi0 {
                    Some(f0) => prob
                        .barrier(&q, t)
                        .is_some_and(|f1| f1 <= f0 + T::lit(0.25) * s * slope),
                    None => prob.slacks(&q, t).is_some(),
                };
                if ok {
                    accepted = Some(q);
                    break;
                }
                s = s * T::lit(0.5);
            }
            match accepted {
                Some(q) => p = q,
                None => break,
            }
        }
        centered &= this_centered;
        if constraints / t <= gap_target {
            break;
        }
        if outer_steps >= cfg.max_outer {
            return Err(Error::NonConvergence {
                what: "barrier outer loop",
                iterations: outer_steps,
                residual: (constraints / t).to_f64_lossy(),
            });
        }
        t = t * T::lit(T_GROWTH);
    }

    let s = prob
        .slacks(&p, t)
        .ok_or_else(|| Error::Infeasible("barrier iterate left the feasible set".into()))?;
    let mu = T::one() / t;
    Ok(BarrierOutcome {
        p,
        newton_steps,
        outer_steps,
        duality_gap: constraints * mu,
        centered,
        xi_sr: mu / s.g,
        lambda_power: mu / s.power,
    })
}
