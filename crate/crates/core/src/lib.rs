//! Capacity of the Gaussian two-hop full-duplex relay channel with
//! worst-case linear residual self-interference.
//!
//! The kernels are generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`, which is what the tolerances quoted in
//! the documentation assume.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod config;
pub mod distribution;
pub mod error;
pub mod linkbudget;
pub mod lowerbound;
pub mod mcoracle;
pub mod numerics;
pub mod relay_opt;
pub mod scalar;
pub mod source_policy;

pub use config::{ScenarioConfig, SweepSpec, SweepVariable};
pub use error::{Error, Result};
pub use linkbudget::{normalize_scenario, path_loss_gain, rate_to_bps, LinkScenario};
pub use relay_opt::{capacity, hd_capacity, Duplex, Regime, SolverConfig};
pub use scalar::Real;

pub type NormalizedChannel = linkbudget::NormalizedChannel<f64>;
pub type DiscreteDistribution = distribution::DiscreteDistribution<f64>;
pub type MassPoint = distribution::MassPoint<f64>;
pub type RelayInputDistribution = distribution::RelayInputDistribution<f64>;
pub type GaussianMixture = numerics::GaussianMixture<f64>;
pub type SourcePolicy = source_policy::SourcePolicy<f64>;
pub type CapacityResult = relay_opt::CapacityResult<f64>;
pub type KktReport = relay_opt::KktReport<f64>;
pub type LowerBound = lowerbound::LowerBound<f64>;
pub type BernoulliGaussian = lowerbound::BernoulliGaussian<f64>;
pub type BenchmarkSuite = benchmarks::BenchmarkSuite<f64>;
