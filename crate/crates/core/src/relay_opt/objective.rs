//! Source-relay rate as a function of the relay masses on a grid.
//!
//! With the threshold eliminated through the power identity, the
//! full-duplex rate `g(p) = sum_j p_j f_j(x_th(p))` is jointly concave in `p`
//! and its Hessian has rank one.

use crate::scalar::{awgn_capacity, Real};

/// Threshold on an amplitude grid for masses `p` (not necessarily
/// normalized): the root of `sum_j alpha p_j (x^2 - x_j^2)^+ = p_s`.
pub(crate) fn grid_threshold<T: Real>(x: &[T], p: &[T], level: T) -> T {
    let mut mass = T::zero();
    let mut moment = T::zero();
    let mut last = T::zero();
    for j in 0..x.len() {
        if !(p[j] > T::zero()) {
            continue;
        }
        mass = mass + p[j];
        moment = moment + p[j] * x[j] * x[j];
        last = ((level + moment) / mass).sqrt();
        let next = x[j + 1..]
            .iter()
            .zip(&p[j + 1..])
            .find(|(_, &pk)| pk > T::zero());
        match next {
            Some((&xk, _)) if last > xk => continue,
            _ => return last,
        }
    }
    last
}

#[derive(Debug, Clone)]
pub(crate) enum SourceObjective<T> {
    /// Threshold policy with finite `alpha`.
    FullDuplex {
        x: Vec<T>,
        alpha: T,
        sigma_r_sq: T,
        p_s: T,
    },
    /// `alpha -> infinity`: the source only speaks while the relay is silent.
    HalfDuplex { snr: T },
}

/// Value and derivatives. The Hessian is `-curv curv^T`.
#[derive(Debug, Clone)]
pub(crate) struct ObjectiveEval<T> {
    pub value: T,
    pub grad: Vec<T>,
    pub curv: Vec<T>,
}

impl<T: Real> SourceObjective<T> {
    pub(crate) fn eval(&self, p: &[T]) -> ObjectiveEval<T> {
        let n = p.len();
        let inv_2ln2 = T::LOG2_E() * T::lit(0.5);
        match self {
            Self::FullDuplex {
                x,
                alpha,
                sigma_r_sq,
                p_s,
            } => {
                let (alpha, sr) = (*alpha, *sigma_r_sq);
                let x_th = grid_threshold(x, p, *p_s / alpha);
                let top = sr + alpha * x_th * x_th;
                let mut value = T::zero();
                let mut grad = vec![T::zero(); n];
                let mut curv = vec![T::zero(); n];
                let mut active_mass = T::zero();
                for j in 0..n {
                    if x[j] >= x_th {
                        continue;
                    }
                    let noise = sr + alpha * x[j] * x[j];
                    let f = T::lit(0.5) * (top / noise).log2();
                    let c = alpha * (x_th * x_th - x[j] * x[j]);
                    value = value + p[j] * f;
                    grad[j] = f - c * inv_2ln2 / top;
                    curv[j] = c;
                    active_mass = active_mass + p[j];
                }
                let scale = (inv_2ln2 / active_mass).sqrt() / top;
                curv.iter_mut().for_each(|c| *c = *c * scale);
                ObjectiveEval { value, grad, curv }
            }
            Self::HalfDuplex { snr } => {
                let a = *snr;
                let p0 = p[0];
                let mut grad = vec![T::zero(); n];
                let mut curv = vec![T::zero(); n];
                let value = p0 * awgn_capacity(a / p0);
                grad[0] = awgn_capacity(a / p0) - a * inv_2ln2 / (p0 + a);
                curv[0] = a / (p0 + a) * (inv_2ln2 / p0).sqrt();
                ObjectiveEval { value, grad, curv }
            }
        }
    }

    pub(crate) fn value(&self, p: &[T]) -> T {
        match self {
            Self::FullDuplex {
                x,
                alpha,
                sigma_r_sq,
                p_s,
            } => {
                let x_th = grid_threshold(x, p, *p_s / *alpha);
                let top = *sigma_r_sq + *alpha * x_th * x_th;
                x.iter()
                    .zip(p)
                    .filter(|(&xj, _)| xj < x_th)
                    .map(|(&xj, &pj)| {
                        pj * T::lit(0.5) * (top / (*sigma_r_sq + *alpha * xj * xj)).log2()
                    })
                    .sum()
            }
            Self::HalfDuplex { snr } => p[0] * awgn_capacity(*snr / p[0]),
        }
    }
}
