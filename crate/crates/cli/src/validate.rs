//! Quadrature against Monte Carlo.

use fdrelay::lowerbound::{lb_mi_source_relay, solve_lowerbound, BernoulliGaussian};
use fdrelay::mcoracle::{mc_entropy, mc_mi_source_relay, McConfig, McEstimate, SrMode};
use fdrelay::numerics::{mixture_entropy, QuadratureSpec};
use fdrelay::scalar::gaussian_entropy;
use fdrelay::source_policy::{mi_source_relay, solve_xth_discrete};
use fdrelay::{
    capacity, normalize_scenario, DiscreteDistribution, GaussianMixture, MassPoint,
    NormalizedChannel, RelayInputDistribution, ScenarioConfig, SourcePolicy,
};
use serde::Serialize;

use crate::report::fmt_num;
use crate::Failure;

/// Agreement band in standard errors.
const SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub quantity: String,
    pub quadrature: f64,
    pub monte_carlo: f64,
    pub stderr: f64,
    pub pass: bool,
}

fn check(quantity: impl Into<String>, quadrature: f64, est: McEstimate) -> Check {
    Check {
        quantity: quantity.into(),
        quadrature,
        monte_carlo: est.estimate,
        stderr: est.stderr,
        pass: est.agrees_with(quadrature, SIGMAS)
            || (est.stderr == 0.0 && (est.estimate - quadrature).abs() < 1e-12),
    }
}

fn sr_checks(
    out: &mut Vec<Check>,
    name: &str,
    dist: &RelayInputDistribution,
    policy: &SourcePolicy,
    sigma_r_sq: f64,
    quad: f64,
    mc: &McConfig,
) -> fdrelay::Result<()> {
    for (mode, tag) in [(SrMode::State, "state"), (SrMode::LikelihoodRatio, "llr")] {
        let est = mc_mi_source_relay(dist, policy, sigma_r_sq, mode, mc)?;
        out.push(check(format!("{name} I_SR ({tag})"), quad, est));
    }
    Ok(())
}

pub fn run_checks(cfg: &ScenarioConfig, mc: &McConfig) -> Result<Vec<Check>, Failure> {
    let q = QuadratureSpec::adaptive(1e-10);
    let mut out = Vec::new();

    let unit = GaussianMixture::gaussian(0.0, 1.0)?;
    out.push(check(
        "unit Gaussian entropy",
        gaussian_entropy(1.0),
        mc_entropy(&unit, mc)?,
    ));

    let bg = RelayInputDistribution::BernoulliGaussian {
        q: 0.5,
        p_r_used: 10.0,
    };
    let mix = bg.output_mixture(1.0)?;
    out.push(check(
        "Bernoulli-Gaussian output entropy",
        mixture_entropy(&mix, &q)?,
        mc_entropy(&mix, mc)?,
    ));

    // alpha = sigma_r^2 = 1, q = p_r = 1/2, p_s = 1.
    let unit_ch = NormalizedChannel::new(1.0, 0.5, 1.0, 1.0, 1.0)?;
    let input = BernoulliGaussian::new(0.5, 0.5)?;
    let x_th = input.threshold(&unit_ch)?;
    let quad = lb_mi_source_relay(&input, x_th, &unit_ch, &q)?;
    let policy = SourcePolicy {
        x_th,
        alpha: 1.0,
        p_s: 1.0,
    };
    sr_checks(
        &mut out,
        "Bernoulli-Gaussian",
        &input.distribution(),
        &policy,
        1.0,
        quad,
        mc,
    )?;

    let three = DiscreteDistribution::new(vec![
        MassPoint { x: 0.0, p: 0.5 },
        MassPoint { x: 1.0, p: 0.5 },
    ])?;
    let x_th = solve_xth_discrete(&three, 1.0, 1.0)?;
    let dist = RelayInputDistribution::Discrete { points: three };
    let quad = mi_source_relay(&dist, x_th, 1.0, 1.0, 1.0, &q)?;
    sr_checks(
        &mut out,
        "three-point",
        &dist,
        &SourcePolicy {
            x_th,
            alpha: 1.0,
            p_s: 1.0,
        },
        1.0,
        quad,
        mc,
    )?;

    // The configured scenario.
    let ch = normalize_scenario(&cfg.scenario)?;
    let res = capacity(&ch, &cfg.solver)?;
    let policy = SourcePolicy {
        x_th: res.x_th,
        alpha: ch.alpha,
        p_s: ch.p_s,
    };
    sr_checks(
        &mut out,
        "scenario optimum",
        &res.dist,
        &policy,
        ch.sigma_r_sq,
        res.mi_sr,
        mc,
    )?;
    let mix = res.dist.output_mixture(ch.sigma_d_sq)?;
    let h = res.mi_rd + gaussian_entropy(ch.sigma_d_sq);
    out.push(check(
        "scenario optimum output entropy",
        h,
        mc_entropy(&mix, mc)?,
    ));
    if ch.alpha > 0.0 {
        let lb = solve_lowerbound(&ch, &cfg.solver)?;
        let mix = lb.input.distribution().output_mixture(ch.sigma_d_sq)?;
        let h = lb.mi_rd + gaussian_entropy(ch.sigma_d_sq);
        out.push(check(
            "scenario lower-bound output entropy",
            h,
            mc_entropy(&mix, mc)?,
        ));
    }
    Ok(out)
}

pub fn to_csv(checks: &[Check]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "quadrature", "monte_carlo", "stderr", "pass"])
        .map_err(Failure::io)?;
    for c in checks {
        w.write_record([
            c.quantity.clone(),
            fmt_num(c.quadrature),
            fmt_num(c.monte_carlo),
            fmt_num(c.stderr),
            if c.pass { "pass".into() } else { "fail".into() },
        ])
        .map_err(Failure::io)?;
    }
    let bytes = w.into_inner().map_err(Failure::io)?;
    String::from_utf8(bytes).map_err(Failure::io)
}
