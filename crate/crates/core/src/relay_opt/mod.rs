//! Capacity of the two-hop channel: regime dispatch, the Gaussian-bottleneck
//! closed form, and the optimization over discrete relay inputs.

mod barrier;
pub mod kernel;
pub mod kkt;
mod objective;
pub mod regime;

use serde::{Deserialize, Serialize};

use crate::distribution::{DiscreteDistribution, RelayInputDistribution};
use crate::error::{Error, Result};
use crate::linkbudget::NormalizedChannel;
use crate::numerics::{mixture_entropy, QuadratureSpec};
use crate::scalar::{awgn_capacity, gaussian_entropy, Real};
use crate::source_policy::{
    allocated_power, mi_source_relay, solve_xth_discrete, transmit_probability,
};

pub use kernel::discrete_mi_rd;
pub use kkt::{kkt_certificate, ComplementarySlackness, KktReport};
pub use regime::{capacity_gaussian_regime, check_gaussian_regime, RegimeTest};

use objective::SourceObjective;

/// Solver settings; all fields have defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Number of candidate amplitudes on `[0, x_max]`.
    pub grid_points: usize,
    /// `x_max = x_max_multiplier * sqrt(p_r)`.
    pub x_max_multiplier: f64,
    /// Target duality gap of the interior-point solve, bits.
    pub tol_bits: f64,
    /// Largest accepted relative residual of the source power identity.
    pub tol_xth: f64,
    /// Maximum number of barrier parameter updates.
    pub max_outer: usize,
    /// Maximum Newton steps per barrier parameter.
    pub max_inner: usize,
    pub quadrature: QuadratureSpec,
    /// Grid masses below this are dropped after the solve.
    pub support_threshold: f64,
    /// Output-entropy nodes per destination noise standard deviation.
    pub y_points_per_sigma: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_points: 201,
            x_max_multiplier: 5.0,
            tol_bits: 1e-11,
            tol_xth: 1e-10,
            max_outer: 40,
            max_inner: 100,
            quadrature: QuadratureSpec::default(),
            support_threshold: 1e-12,
            y_points_per_sigma: 8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.grid_points < 3 {
            return bad(format!(
                "grid_points must be at least 3, got {}",
                self.grid_points
            ));
        }
        if !(self.x_max_multiplier > 0.0 && self.x_max_multiplier.is_finite()) {
            return bad(format!(
                "x_max_multiplier must be positive, got {}",
                self.x_max_multiplier
            ));
        }
        for (name, v) in [
            ("tol_bits", self.tol_bits),
            ("tol_xth", self.tol_xth),
            ("support_threshold", self.support_threshold),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must be in (0, 1), got {v}"));
            }
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("max_outer and max_inner must be positive".into());
        }
        if self.y_points_per_sigma < 2 {
            return bad(format!(
                "y_points_per_sigma must be at least 2, got {}",
                self.y_points_per_sigma
            ));
        }
        self.quadrature.validate()
    }
}

/// Which expression produced the capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// No residual self-interference.
    Ideal,
    /// Gaussian relay input, relay-destination link limiting.
    GaussianBottleneck,
    /// Discrete relay input with balanced links.
    Discrete,
    /// Zero source or relay power.
    Degenerate,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Ideal => "ideal",
            Regime::GaussianBottleneck => "gaussian_bottleneck",
            Regime::Discrete => "discrete",
            Regime::Degenerate => "degenerate",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Duplex {
    Full,
    Half,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub newton_steps: usize,
    pub outer_steps: usize,
    pub duality_gap: f64,
    /// Every barrier subproblem reached its centering tolerance.
    pub centered: bool,
    /// `|allocated source power - p_s| / p_s` at the returned threshold.
    pub xth_residual: f64,
    /// Candidate grid size and extent.
    pub grid_points: usize,
    pub x_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CapacityResult<T: Real> {
    /// Bits per real symbol.
    pub capacity: T,
    pub regime: Regime,
    pub duplex: Duplex,
    /// Amplitude threshold of the source policy; infinite without interference.
    pub x_th: T,
    pub dist: RelayInputDistribution<T>,
    pub mi_sr: T,
    pub mi_rd: T,
    /// Probability that the source transmits.
    pub p_transmit: T,
    pub kkt: Option<KktReport<T>>,
    pub converged: bool,
    pub diagnostics: SolverDiagnostics,
}

impl<T: Real> CapacityResult<T> {
    /// Mass of the silent relay symbol.
    pub fn p_silent(&self) -> T {
        self.dist.prob_zero()
    }

    pub fn discrete(&self) -> Option<&DiscreteDistribution<T>> {
        match &self.dist {
            RelayInputDistribution::Discrete { points } => Some(points),
            _ => None,
        }
    }
}

/// `I(X_R; Y_D)` in bits.
///
/// Discrete inputs use the half-line trapezoid rule, mixtures the adaptive
/// mixture entropy, and a Gaussian input the closed form.
pub fn mi_relay_destination<T: Real>(
    dist: &RelayInputDistribution<T>,
    sigma_d_sq: T,
    q: &QuadratureSpec,
) -> Result<T> {
    if !(sigma_d_sq > T::zero()) {
        return Err(Error::domain("destination noise must be positive"));
    }
    match dist {
        RelayInputDistribution::Discrete { points } => Ok(discrete_mi_rd(
            points,
            sigma_d_sq,
            SolverConfig::default().y_points_per_sigma,
        )),
        RelayInputDistribution::Gaussian { variance } => Ok(awgn_capacity(*variance / sigma_d_sq)),
        RelayInputDistribution::BernoulliGaussian { p_r_used, .. } => {
            if *p_r_used == T::zero() {
                return Ok(T::zero());
            }
            let h = mixture_entropy(&dist.output_mixture(sigma_d_sq)?, q)?;
            Ok((h - gaussian_entropy(sigma_d_sq)).max(T::zero()))
        }
    }
}

/// Full-duplex rates `(I_SR, I_RD)` of a discrete relay input under the
/// threshold policy it induces.
pub fn discrete_rates<T: Real>(
    ch: &NormalizedChannel<T>,
    dist: &DiscreteDistribution<T>,
    cfg: &SolverConfig,
) -> Result<(T, T)> {
    let rd = RelayInputDistribution::Discrete {
        points: dist.clone(),
    };
    let x_th = solve_xth_discrete(dist, ch.alpha, ch.p_s)?;
    let sr = mi_source_relay(&rd, x_th, ch.alpha, ch.sigma_r_sq, ch.p_s, &cfg.quadrature)?;
    Ok((
        sr,
        discrete_mi_rd(dist, ch.sigma_d_sq, cfg.y_points_per_sigma),
    ))
}

/// Half-duplex rates `(I_SR, I_RD)` of a discrete relay input.
pub fn hd_rates<T: Real>(
    ch: &NormalizedChannel<T>,
    dist: &DiscreteDistribution<T>,
    cfg: &SolverConfig,
) -> (T, T) {
    let p0 = dist.prob_zero();
    let sr = if p0 > T::zero() {
        p0 * awgn_capacity(ch.p_s / (p0 * ch.sigma_r_sq))
    } else {
        T::zero()
    };
    (
        sr,
        discrete_mi_rd(dist, ch.sigma_d_sq, cfg.y_points_per_sigma),
    )
}

fn degenerate<T: Real>(ch: &NormalizedChannel<T>, duplex: Duplex) -> CapacityResult<T> {
    let x_th = if ch.alpha == T::zero() && duplex == Duplex::Full {
        T::infinity()
    } else {
        T::zero()
    };
    let p_transmit = if ch.p_s > T::zero() {
        T::one()
    } else {
        T::zero()
    };
    CapacityResult {
        capacity: T::zero(),
        regime: Regime::Degenerate,
        duplex,
        x_th,
        dist: RelayInputDistribution::Discrete {
            points: DiscreteDistribution::silent(),
        },
        mi_sr: if ch.p_r == T::zero() {
            awgn_capacity(ch.p_s / ch.sigma_r_sq)
        } else {
            T::zero()
        },
        mi_rd: T::zero(),
        p_transmit,
        kkt: None,
        converged: true,
        diagnostics: SolverDiagnostics {
            centered: true,
            ..Default::default()
        },
    }
}

/// Capacity of the full-duplex channel.
pub fn capacity<T: Real>(
    ch: &NormalizedChannel<T>,
    cfg: &SolverConfig,
) -> Result<CapacityResult<T>> {
    ch.validate()?;
    cfg.validate()?;
    if ch.p_s == T::zero() || ch.p_r == T::zero() {
        return Ok(degenerate(ch, Duplex::Full));
    }
    if ch.alpha == T::zero() {
        let mi_sr = awgn_capacity(ch.p_s / ch.sigma_r_sq);
        let mi_rd = awgn_capacity(ch.p_r / ch.sigma_d_sq);
        return Ok(CapacityResult {
            capacity: mi_sr.min(mi_rd),
            regime: Regime::Ideal,
            duplex: Duplex::Full,
            x_th: T::infinity(),
            dist: RelayInputDistribution::Gaussian { variance: ch.p_r },
            mi_sr,
            mi_rd,
            p_transmit: T::one(),
            kkt: None,
            converged: true,
            diagnostics: SolverDiagnostics {
                centered: true,
                ..Default::default()
            },
        });
    }
    let test = check_gaussian_regime(ch, &cfg.quadrature)?;
    if test.gaussian {
        let dist = RelayInputDistribution::Gaussian { variance: ch.p_r };
        let mi_rd = capacity_gaussian_regime(ch.p_r, ch.sigma_d_sq);
        let residual = (allocated_power(&dist, test.x_th, ch.alpha) - ch.p_s).abs() / ch.p_s;
        let mut result = CapacityResult {
            capacity: mi_rd,
            regime: Regime::GaussianBottleneck,
            duplex: Duplex::Full,
            x_th: test.x_th,
            p_transmit: transmit_probability(&dist, test.x_th),
            dist,
            mi_sr: T::lit(0.5) * test.sr_side,
            mi_rd,
            kkt: None,
            converged: true,
            diagnostics: SolverDiagnostics {
                centered: true,
                xth_residual: residual.to_f64_lossy(),
                ..Default::default()
            },
        };
        result.kkt = Some(kkt_certificate(&result, ch, cfg)?);
        return Ok(result);
    }
    solve_discrete_capacity(ch, cfg)
}

/// Candidate amplitudes `0, ..., x_max` of the discrete solve.
pub fn amplitude_grid<T: Real>(p_r: T, cfg: &SolverConfig) -> Vec<T> {
    let x_max = T::lit(cfg.x_max_multiplier) * p_r.sqrt();
    let last = T::lit((cfg.grid_points - 1) as f64);
    (0..cfg.grid_points)
        .map(|j| x_max * T::lit(j as f64) / last)
        .collect()
}

fn solve_on_grid<T: Real>(
    ch: &NormalizedChannel<T>,
    cfg: &SolverConfig,
    duplex: Duplex,
) -> Result<CapacityResult<T>> {
    let x = amplitude_grid(ch.p_r, cfg);
    let kern = kernel::RdKernel::new(&x, ch.sigma_d_sq, cfg.y_points_per_sigma);
    let obj = match duplex {
        Duplex::Full => SourceObjective::FullDuplex {
            x: x.clone(),
            alpha: ch.alpha,
            sigma_r_sq: ch.sigma_r_sq,
            p_s: ch.p_s,
        },
        Duplex::Half => SourceObjective::HalfDuplex {
            snr: ch.p_s / ch.sigma_r_sq,
        },
    };
    let out = barrier::solve(&obj, &kern, &x, ch.p_r, cfg)?;
    let points = DiscreteDistribution::from_grid(&x, &out.p, T::lit(cfg.support_threshold))?;
    let (x_th, mi_sr, mi_rd, p_transmit, residual) = match duplex {
        Duplex::Full => {
            let x_th = solve_xth_discrete(&points, ch.alpha, ch.p_s)?;
            let dist = RelayInputDistribution::Discrete {
                points: points.clone(),
            };
            let (sr, rd) = discrete_rates(ch, &points, cfg)?;
            let residual = (allocated_power(&dist, x_th, ch.alpha) - ch.p_s).abs() / ch.p_s;
            (x_th, sr, rd, points.mass_below(x_th), residual)
        }
        Duplex::Half => {
            let (sr, rd) = hd_rates(ch, &points, cfg);
            (T::zero(), sr, rd, points.prob_zero(), T::zero())
        }
    };
    if residual > T::lit(cfg.tol_xth).max(T::lit(1e3) * T::epsilon()) {
        return Err(Error::NonConvergence {
            what: "source power identity",
            iterations: out.newton_steps,
            residual: residual.to_f64_lossy(),
        });
    }
    let diagnostics = SolverDiagnostics {
        newton_steps: out.newton_steps,
        outer_steps: out.outer_steps,
        duality_gap: out.duality_gap.to_f64_lossy(),
        centered: out.centered,
        xth_residual: residual.to_f64_lossy(),
        grid_points: x.len(),
        x_max: x[x.len() - 1].to_f64_lossy(),
    };
    let mut result = CapacityResult {
        capacity: mi_sr.min(mi_rd),
        regime: Regime::Discrete,
        duplex,
        x_th,
        dist: RelayInputDistribution::Discrete { points },
        mi_sr,
        mi_rd,
        p_transmit,
        kkt: None,
        converged: out.centered,
        diagnostics,
    };
    let mut report = kkt::certificate(&result, ch, cfg, Some(out.xi_sr))?;
    report.barrier_xi = Some(out.xi_sr);
    report.barrier_lambda_power = Some(out.lambda_power);
    result.kkt = Some(report);
    Ok(result)
}

/// Optimizes the relay input over a symmetric amplitude grid.
pub fn solve_discrete_capacity<T: Real>(
    ch: &NormalizedChannel<T>,
    cfg: &SolverConfig,
) -> Result<CapacityResult<T>> {
    ch.validate()?;
    cfg.validate()?;
    if !(ch.alpha > T::zero()) {
        return Err(Error::domain("the discrete solve needs alpha > 0"));
    }
    if ch.p_s == T::zero() || ch.p_r == T::zero() {
        return Ok(degenerate(ch, Duplex::Full));
    }
    solve_on_grid(ch, cfg, Duplex::Full)
}

/// Capacity of the half-duplex channel, the `alpha -> infinity` limit: the
/// source transmits only while the relay is silent, with power `p_s / p_0`.
pub fn hd_capacity<T: Real>(
    ch: &NormalizedChannel<T>,
    cfg: &SolverConfig,
) -> Result<CapacityResult<T>> {
    ch.validate()?;
    cfg.validate()?;
    if ch.p_s == T::zero() || ch.p_r == T::zero() {
        return Ok(degenerate(ch, Duplex::Half));
    }
    solve_on_grid(ch, cfg, Duplex::Half)
}
