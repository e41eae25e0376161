//! Relay input distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{GaussianMixture, MixtureComponent};
use crate::scalar::Real;

/// Amplitude `x >= 0` with probability `p`. For `x > 0` the mass is split
/// evenly between `+x` and `-x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MassPoint<T: Real> {
    pub x: T,
    pub p: T,
}

/// Symmetric discrete distribution stored by amplitude.
///
/// The first point is always the zero symbol, possibly with zero mass;
/// amplitudes are strictly increasing and the masses sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", try_from = "Vec<MassPoint<T>>", into = "Vec<MassPoint<T>>")]
pub struct DiscreteDistribution<T: Real> {
    points: Vec<MassPoint<T>>,
}

impl<T: Real> TryFrom<Vec<MassPoint<T>>> for DiscreteDistribution<T> {
    type Error = Error;
    fn try_from(points: Vec<MassPoint<T>>) -> Result<Self> {
        Self::new(points)
    }
}

impl<T: Real> From<DiscreteDistribution<T>> for Vec<MassPoint<T>> {
    fn from(d: DiscreteDistribution<T>) -> Self {
        d.points
    }
}

impl<T: Real> DiscreteDistribution<T> {
    /// Validates and stores `points`. A zero point is prepended when missing.
    pub fn new(mut points: Vec<MassPoint<T>>) -> Result<Self> {
        if points.first().is_none_or(|m| m.x != T::zero()) {
            points.insert(
                0,
                MassPoint {
                    x: T::zero(),
                    p: T::zero(),
                },
            );
        }
        let mut total = T::zero();
        for (i, m) in points.iter().enumerate() {
            if !(m.p >= T::zero()) || !m.p.is_finite() {
                return Err(Error::domain(format!(
                    "mass {} at x = {} is invalid",
                    m.p, m.x
                )));
            }
            if !m.x.is_finite() || m.x < T::zero() {
                return Err(Error::domain(format!(
                    "amplitude {} must be finite and nonnegative",
                    m.x
                )));
            }
            if i > 0 && !(m.x > points[i - 1].x) {
                return Err(Error::domain("amplitudes must be strictly increasing"));
            }
            total = total + m.p;
        }
        if (total - T::one()).abs() > T::tol(1e-12, 256.0) {
            return Err(Error::domain(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { points })
    }

    /// All mass on the zero symbol.
    pub fn silent() -> Self {
        Self {
            points: vec![MassPoint {
                x: T::zero(),
                p: T::one(),
            }],
        }
    }

    /// Builds from parallel slices, dropping amplitudes whose mass is below
    /// `threshold` and moving that mass onto the zero symbol.
    pub fn from_grid(x: &[T], p: &[T], threshold: T) -> Result<Self> {
        assert_eq!(x.len(), p.len(), "grid and mass lengths differ");
        let total: T = p.iter().copied().sum();
        let mut points = Vec::new();
        let mut zero = T::zero();
        for (&xj, &pj) in x.iter().zip(p) {
            let pj = pj / total;
            if xj == T::zero() {
                zero = zero + pj;
            } else if pj >= threshold {
                points.push(MassPoint { x: xj, p: pj });
            } else {
                zero = zero + pj;
            }
        }
        points.insert(
            0,
            MassPoint {
                x: T::zero(),
                p: zero,
            },
        );
        Self::new(points)
    }

    pub fn points(&self) -> &[MassPoint<T>] {
        &self.points
    }

    pub fn prob_zero(&self) -> T {
        self.points[0].p
    }

    pub fn second_moment(&self) -> T {
        self.points.iter().map(|m| m.x * m.x * m.p).sum()
    }

    /// Mass of the amplitudes strictly below `x`.
    pub fn mass_below(&self, x: T) -> T {
        self.points.iter().filter(|m| m.x < x).map(|m| m.p).sum()
    }

    /// Points carrying positive mass.
    pub fn support(&self) -> impl Iterator<Item = &MassPoint<T>> {
        self.points.iter().filter(|m| m.p > T::zero())
    }

    /// Signed atoms `(value, probability)` with the pairs expanded.
    pub fn atoms(&self) -> Vec<(T, T)> {
        let half = T::lit(0.5);
        let mut out = Vec::with_capacity(2 * self.points.len());
        for m in self.points.iter().rev().filter(|m| m.x > T::zero()) {
            out.push((-m.x, half * m.p));
        }
        out.push((T::zero(), self.points[0].p));
        for m in self.points.iter().filter(|m| m.x > T::zero()) {
            out.push((m.x, half * m.p));
        }
        out
    }
}

/// What the relay sends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "")]
pub enum RelayInputDistribution<T: Real> {
    Discrete {
        points: DiscreteDistribution<T>,
    },
    Gaussian {
        variance: T,
    },
    /// Zero with probability `1 - q`, otherwise `N(0, p_r_used / q)`.
    BernoulliGaussian {
        q: T,
        p_r_used: T,
    },
}

impl<T: Real> RelayInputDistribution<T> {
    pub fn second_moment(&self) -> T {
        match self {
            Self::Discrete { points } => points.second_moment(),
            Self::Gaussian { variance } => *variance,
            Self::BernoulliGaussian { p_r_used, .. } => *p_r_used,
        }
    }

    /// Probability of the silent symbol.
    pub fn prob_zero(&self) -> T {
        match self {
            Self::Discrete { points } => points.prob_zero(),
            Self::Gaussian { .. } => T::zero(),
            Self::BernoulliGaussian { q, .. } => T::one() - *q,
        }
    }

    /// Law of `X_R + N` with `N ~ N(0, noise)`.
    pub fn output_mixture(&self, noise: T) -> Result<GaussianMixture<T>> {
        match self {
            Self::Discrete { points } => {
                let comps = points
                    .atoms()
                    .into_iter()
                    .filter(|&(_, w)| w > T::zero())
                    .map(|(mean, weight)| MixtureComponent {
                        weight,
                        mean,
                        variance: noise,
                    })
                    .collect();
                GaussianMixture::new(comps)
            }
            Self::Gaussian { variance } => GaussianMixture::gaussian(T::zero(), *variance + noise),
            Self::BernoulliGaussian { q, p_r_used } => {
                let mut comps = vec![MixtureComponent {
                    weight: *q,
                    mean: T::zero(),
                    variance: *p_r_used / *q + noise,
                }];
                if *q < T::one() {
                    comps.push(MixtureComponent {
                        weight: T::one() - *q,
                        mean: T::zero(),
                        variance: noise,
                    });
                }
                GaussianMixture::new(comps)
            }
        }
    }
}
