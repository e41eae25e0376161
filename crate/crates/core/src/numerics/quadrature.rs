//! One-dimensional quadrature: Gauss–Hermite rules and adaptive Simpson.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Integration rule selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadMethod {
    GaussHermite,
    Adaptive,
}

/// How Gaussian expectations and entropies are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub method: QuadMethod,
    /// Node count of the Gauss–Hermite rule.
    pub order: usize,
    /// Absolute error target.
    pub abs_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            method: QuadMethod::GaussHermite,
            order: 96,
            abs_tol: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn adaptive(abs_tol: f64) -> Self {
        Self {
            method: QuadMethod::Adaptive,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == QuadMethod::GaussHermite && self.order < 16 {
            return Err(Error::Config(format!(
                "gauss-hermite order must be at least 16, got {}",
                self.order
            )));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::Config(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        Ok(())
    }
}

/// Nodes and weights for `int f(t) exp(-t^2) dt`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the `n`-point rule by Newton iteration on the orthonormal
    /// Hermite recurrence, seeded with the usual asymptotic root estimates.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("Gauss-Hermite order must be positive"));
        }
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let nf = n as f64;
        let m = n.div_ceil(2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let mut z = 0.0_f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            let mut converged = false;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 3e-14 * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NonConvergence {
                    what: "Gauss-Hermite node",
                    iterations: 100,
                    residual: z,
                });
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        Ok(Self { nodes, weights })
    }

    /// Shared rule of order `n`, built once per process.
    pub fn cached(n: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&n) {
            return Ok(rule.clone());
        }
        let rule = Arc::new(Self::new(n)?);
        cache
            .lock()
            .expect("rule cache poisoned")
            .insert(n, rule.clone());
        Ok(rule)
    }

    /// `E[f(X)]` for `X ~ N(mean, variance)`.
    pub fn expectation<T: Real>(&self, mut f: impl FnMut(T) -> T, mean: T, variance: T) -> T {
        let scale = (T::lit(2.0) * variance).sqrt();
        let mut acc = T::zero();
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + T::lit(w) * f(mean + scale * T::lit(t));
        }
        acc / T::PI().sqrt()
    }
}

const MAX_DEPTH: usize = 48;
const MAX_INTERVALS: usize = 1 << 20;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
///
/// The interval is first cut into eight panels so that narrow features are not
/// skipped by the initial five-point estimate.
pub fn adaptive_simpson<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, tol: T) -> Result<T> {
    if !(tol > T::zero()) {
        return Err(Error::domain("quadrature tolerance must be positive"));
    }
    if a == b {
        return Ok(T::zero());
    }
    let half = T::lit(0.5);
    let panels = 8;
    let h = (b - a) / T::lit(panels as f64);
    let mut stack = Vec::with_capacity(64);
    for k in 0..panels {
        let lo = a + h * T::lit(k as f64);
        let hi = if k + 1 == panels { b } else { lo + h };
        let mid = half * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / T::lit(6.0) * (flo + T::lit(4.0) * fmid + fhi);
        stack.push(Panel {
            lo,
            hi,
            flo,
            fmid,
            fhi,
            whole,
            tol: tol / T::lit(panels as f64),
            depth: 0,
        });
    }
    let mut total = T::zero();
    let mut worst = T::zero();
    let mut visited = 0usize;
    while let Some(pn) = stack.pop() {
        visited += 1;
        let m = half * (pn.lo + pn.hi);
        let lm = half * (pn.lo + m);
        let rm = half * (m + pn.hi);
        let flm = f(lm);
        let frm = f(rm);
        let w6 = (m - pn.lo) / T::lit(6.0);
        let left = w6 * (pn.flo + T::lit(4.0) * flm + pn.fmid);
        let right = w6 * (pn.fmid + T::lit(4.0) * frm + pn.fhi);
        let refined = left + right;
        let err = (refined - pn.whole).abs();
        if !err.is_finite() {
            return Err(Error::domain("non-finite integrand in adaptive quadrature"));
        }
        let too_deep =
            pn.depth >= MAX_DEPTH || visited >= MAX_INTERVALS || m <= pn.lo || m >= pn.hi;
        // Below this the difference is rounding noise, whatever the target. The
        // second term covers the rounding of the abscissae themselves, which
        // dominates once panels are narrow compared with their position.
        let fmag = (pn.flo.abs() + T::lit(4.0) * pn.fmid.abs() + pn.fhi.abs()) / T::lit(6.0);
        let noise = T::epsilon()
            * (T::lit(64.0) * (left.abs() + right.abs())
                + T::lit(4.0) * (pn.lo.abs() + pn.hi.abs()) * fmag);
        if err <= T::lit(15.0) * pn.tol || err <= noise || too_deep {
            if too_deep && err > T::lit(15.0) * pn.tol {
                worst = worst.max(err);
            }
            total = total + refined + (refined - pn.whole) / T::lit(15.0);
            continue;
        }
        let t2 = pn.tol * half;
        stack.push(Panel {
            lo: pn.lo,
            hi: m,
            flo: pn.flo,
            fmid: flm,
            fhi: pn.fmid,
            whole: left,
            tol: t2,
            depth: pn.depth + 1,
        });
        stack.push(Panel {
            lo: m,
            hi: pn.hi,
            flo: pn.fmid,
            fmid: frm,
            fhi: pn.fhi,
            whole: right,
            tol: t2,
            depth: pn.depth + 1,
        });
    }
    if worst > tol {
        return Err(Error::NonConvergence {
            what: "adaptive Simpson quadrature",
            iterations: visited,
            residual: worst.to_f64_lossy(),
        });
    }
    Ok(total)
}

struct Panel<T> {
    lo: T,
    hi: T,
    flo: T,
    fmid: T,
    fhi: T,
    whole: T,
    tol: T,
    depth: usize,
}

/// Adaptive Simpson over consecutive breakpoints, sharing `tol` by length.
pub fn adaptive_piecewise<T: Real>(mut f: impl FnMut(T) -> T, breaks: &[T], tol: T) -> Result<T> {
    if breaks.len() < 2 {
        return Ok(T::zero());
    }
    let span = breaks[breaks.len() - 1] - breaks[0];
    let mut acc = T::zero();
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let share = (tol * (w[1] - w[0]) / span).max(tol * T::lit(1e-6));
        acc = acc + adaptive_simpson(&mut f, w[0], w[1], share)?;
    }
    Ok(acc)
}

/// Half-width, in standard deviations, of the window used for adaptive
/// Gaussian expectations. The neglected mass is below 1e-32.
const GAUSS_WINDOW: f64 = 12.0;

/// `E[f(X)]` for `X ~ N(mean, variance)`.
///
/// `kinks` lists abscissae where `f` is not smooth. With no kinks and the
/// Gauss–Hermite method the fixed rule is used; otherwise the standardized
/// integrand is integrated adaptively with the kinks as breakpoints.
pub fn normal_expectation<T: Real>(
    mut f: impl FnMut(T) -> T,
    mean: T,
    variance: T,
    kinks: &[T],
    q: &QuadratureSpec,
) -> Result<T> {
    if !(variance > T::zero()) {
        return Err(Error::domain(
            "normal expectation needs a positive variance",
        ));
    }
    if q.method == QuadMethod::GaussHermite && kinks.is_empty() {
        let rule = GaussHermite::cached(q.order)?;
        return Ok(rule.expectation(f, mean, variance));
    }
    let sd = variance.sqrt();
    let w = T::lit(GAUSS_WINDOW);
    let mut breaks = vec![-w, w];
    for &k in kinks {
        let z = (k - mean) / sd;
        if z > -w && z < w {
            breaks.push(z);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    breaks.dedup();
    let norm = T::one() / T::TAU().sqrt();
    adaptive_piecewise(
        |z| {
            let phi = norm * (-T::lit(0.5) * z * z).exp();
            if phi == T::zero() {
                T::zero()
            } else {
                f(mean + sd * z) * phi
            }
        },
        &breaks,
        T::lit(q.abs_tol),
    )
}

/// `E[f(X)]` for zero-mean `X` with the given variance.
pub fn gauss_expectation<T: Real>(
    f: impl FnMut(T) -> T,
    variance: T,
    kinks: &[T],
    q: &QuadratureSpec,
) -> Result<T> {
    normal_expectation(f, T::zero(), variance, kinks, q)
}
