//! Numerical kernels shared by the solvers.

pub mod erf;
pub mod linalg;
pub mod mixture;
pub mod quadrature;
pub mod roots;

pub use erf::{erf, erfc, norm_cdf};
pub use mixture::{mixture_entropy, GaussianMixture, MixtureComponent};
pub use quadrature::{
    adaptive_piecewise, adaptive_simpson, gauss_expectation, normal_expectation, GaussHermite,
    QuadMethod, QuadratureSpec,
};
pub use roots::{bisect_root, brent_root, golden_max};
