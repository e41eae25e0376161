//! Scalar abstraction shared by every solver in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar the numerical kernels are written against.
///
/// Implemented for `f32` and `f64`. The tolerances quoted throughout the crate
/// (1e-9 bits, 1e-12 probability sums) are only reachable in `f64`; `f32` is
/// useful for the closed-form pieces and for quick exploratory sweeps.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Infallible for the implemented types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(tol, k * epsilon)`; keeps fixed tolerances meaningful in low precision.
    #[inline]
    fn tol(tol: f64, ulps: f64) -> Self {
        Self::lit(tol).max(Self::epsilon() * Self::lit(ulps))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `log2(1 + x)` with the usual care near zero.
#[inline]
pub(crate) fn log2_1p<T: Real>(x: T) -> T {
    x.ln_1p() * T::LOG2_E()
}

/// Half the base-2 log of `1 + snr`: the AWGN capacity per real symbol.
#[inline]
pub fn awgn_capacity<T: Real>(snr: T) -> T {
    T::lit(0.5) * log2_1p(snr)
}

/// Differential entropy of `N(0, variance)` in bits.
#[inline]
pub fn gaussian_entropy<T: Real>(variance: T) -> T {
    T::lit(0.5) * (T::TAU() * T::E() * variance).log2()
}
