use serde::{Deserialize, Serialize};

use super::quadrature::{adaptive_piecewise, QuadratureSpec};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MixtureComponent<T: Real> {
    pub weight: T,
    pub mean: T,
    pub variance: T,
}

/// Finite mixture of one-dimensional Gaussians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GaussianMixture<T: Real> {
    components: Vec<MixtureComponent<T>>,
}

impl<T: Real> GaussianMixture<T> {
    /// Validates weights (nonnegative, summing to one within 1e-12) and
    /// variances (strictly positive). Zero-weight components are dropped.
    pub fn new(components: Vec<MixtureComponent<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("mixture needs at least one component"));
        }
        let mut total = T::zero();
        for c in &components {
            if !(c.weight >= T::zero()) || !c.weight.is_finite() {
                return Err(Error::domain(format!(
                    "invalid mixture weight {}",
                    c.weight
                )));
            }
            if !(c.variance > T::zero()) || !c.variance.is_finite() || !c.mean.is_finite() {
                return Err(Error::domain(format!(
                    "mixture component needs finite mean and positive variance, got ({}, {})",
                    c.mean, c.variance
                )));
            }
            total = total + c.weight;
        }
        if (total - T::one()).abs() > T::tol(1e-12, 64.0) {
            return Err(Error::domain(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        let components = components
            .into_iter()
            .filter(|c| c.weight > T::zero())
            .collect();
        Ok(Self { components })
    }

    /// Single Gaussian.
    pub fn gaussian(mean: T, variance: T) -> Result<Self> {
        Self::new(vec![MixtureComponent {
            weight: T::one(),
            mean,
            variance,
        }])
    }

    pub fn components(&self) -> &[MixtureComponent<T>] {
        &self.components
    }

    pub fn mean(&self) -> T {
        self.components.iter().map(|c| c.weight * c.mean).sum()
    }

    pub fn variance(&self) -> T {
        let mu = self.mean();
        self.components
            .iter()
            .map(|c| c.weight * (c.variance + (c.mean - mu) * (c.mean - mu)))
            .sum()
    }

    pub fn min_variance(&self) -> T {
        self.components
            .iter()
            .map(|c| c.variance)
            .fold(T::infinity(), T::min)
    }

    pub fn max_variance(&self) -> T {
        self.components
            .iter()
            .map(|c| c.variance)
            .fold(T::zero(), T::max)
    }

    /// The mixture with every mean negated.
    pub fn reflected(&self) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| MixtureComponent {
                mean: -c.mean,
                ..*c
            })
            .collect();
        Self { components }
    }

    /// Natural log of the density, evaluated with log-sum-exp.
    pub fn ln_density(&self, y: T) -> T {
        let half = T::lit(0.5);
        let mut best = T::neg_infinity();
        let mut acc = T::zero();
        for c in &self.components {
            let d = y - c.mean;
            let t = c.weight.ln() - half * (T::TAU() * c.variance).ln() - half * d * d / c.variance;
            if t > best {
                acc = acc * (best - t).exp() + T::one();
                best = t;
            } else {
                acc = acc + (t - best).exp();
            }
        }
        if best == T::neg_infinity() {
            return best;
        }
        best + acc.ln()
    }

    pub fn density(&self, y: T) -> T {
        self.ln_density(y).exp()
    }
}

/// Differential entropy `-int p log2 p` of a mixture, in bits.
///
/// Integrates adaptively over `[min mean - 10 sd_max, max mean + 10 sd_max]`
/// with the component means as breakpoints. `q.abs_tol` is the target; the
/// quadrature method field is ignored because a fixed Gauss–Hermite rule per
/// component is inaccurate when the mixture is multimodal.
pub fn mixture_entropy<T: Real>(m: &GaussianMixture<T>, q: &QuadratureSpec) -> Result<T> {
    let sd = m.max_variance().sqrt();
    let w = T::lit(10.0) * sd;
    let mut breaks: Vec<T> = m.components.iter().map(|c| c.mean).collect();
    let lo = breaks.iter().copied().fold(T::infinity(), T::min) - w;
    let hi = breaks.iter().copied().fold(T::neg_infinity(), T::max) + w;
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite means"));
    breaks.dedup();
    let tol = T::lit(q.abs_tol * 0.9);
    let h = adaptive_piecewise(
        |y| {
            let lp = m.ln_density(y);
            if lp == T::neg_infinity() {
                T::zero()
            } else {
                -lp.exp() * lp
            }
        },
        &breaks,
        tol,
    )?;
    Ok(h * T::LOG2_E())
}
