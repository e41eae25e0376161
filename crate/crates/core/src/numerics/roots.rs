//! Scalar root finding and one-dimensional maximization.

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_ITER: usize = 400;

fn bracket_error<T: Real>(lo: T, hi: T, f_lo: T, f_hi: T) -> Error {
    Error::Bracket {
        lo: lo.to_f64_lossy(),
        hi: hi.to_f64_lossy(),
        f_lo: f_lo.to_f64_lossy(),
        f_hi: f_hi.to_f64_lossy(),
    }
}

/// Bisection on `[lo, hi]` until the bracket is narrower than `tol`.
pub fn bisect_root<T: Real>(mut f: impl FnMut(T) -> T, lo: T, hi: T, tol: T) -> Result<T> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if !(fa * fb < T::zero()) {
        return Err(bracket_error(a, b, fa, fb));
    }
    for _ in 0..MAX_ITER {
        let m = T::lit(0.5) * (a + b);
        if b - a <= tol || m <= a || m >= b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == T::zero() {
            return Ok(m);
        }
        if (fm < T::zero()) == (fa < T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(T::lit(0.5) * (a + b))
}

/// Brent's method (inverse quadratic interpolation with bisection fallback).
pub fn brent_root<T: Real>(mut f: impl FnMut(T) -> T, lo: T, hi: T, tol: T) -> Result<T> {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if !(fa * fb < T::zero()) {
        return Err(bracket_error(a, b, fa, fb));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + half * tol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = T::lit(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol1 {
            b + d
        } else if xm > T::zero() {
            b + tol1
        } else {
            b - tol1
        };
        fb = f(b);
    }
    Err(Error::NonConvergence {
        what: "Brent root finder",
        iterations: MAX_ITER,
        residual: fb.to_f64_lossy(),
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Returns `(argmax, max)`; the endpoints are also compared so that a
/// boundary optimum is reported exactly.
pub fn golden_max<T: Real>(mut f: impl FnMut(T) -> T, lo: T, hi: T, tol: T) -> (T, T) {
    let invphi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - invphi * (b - a);
    let mut x2 = a + invphi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iter = 0;
    while b - a > tol && iter < MAX_ITER {
        iter += 1;
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::erf::erf;

    #[test]
    fn linear_root() {
        let r = bisect_root(|x: f64| x - 2.0, 0.0, 5.0, 1e-13).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        let r = brent_root(|x: f64| x - 2.0, 0.0, 5.0, 1e-14).unwrap();
        assert!((r - 2.0).abs() < 1e-13);
    }

    #[test]
    fn inverse_erf_half() {
        let want = 0.476_936_276_204_469_9;
        let r = bisect_root(|x: f64| erf(x) - 0.5, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - want).abs() < 1e-13);
        let r = brent_root(|x: f64| erf(x) - 0.5, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - want).abs() < 1e-14);
    }

    #[test]
    fn same_sign_is_bracket_error() {
        let e = bisect_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(e, Error::Bracket { .. }));
        assert!(brent_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn golden_interior_and_boundary() {
        let (x, v) = golden_max(|x: f64| -(x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8 && v.abs() < 1e-15);
        let (x, _) = golden_max(|x: f64| x, 0.0, 1.0, 1e-10);
        assert_eq!(x, 1.0);
    }
}
