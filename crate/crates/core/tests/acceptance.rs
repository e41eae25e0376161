//! End-to-end acceptance run.
//!
//! Each criterion is evaluated at its stated tolerance and reported on one
//! `PASS` or `FAIL` line. The process exits non-zero if any criterion fails.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use fdrelay::benchmarks::benchmark_suite;
use fdrelay::lowerbound::{lb_mi_source_relay, solve_lowerbound, BernoulliGaussian};
use fdrelay::mcoracle::{mc_entropy, mc_mi_source_relay, McConfig, SrMode};
use fdrelay::numerics::{mixture_entropy, QuadratureSpec};
use fdrelay::relay_opt::{amplitude_grid, discrete_rates};
use fdrelay::scalar::{awgn_capacity, gaussian_entropy};
use fdrelay::source_policy::{mi_source_relay, solve_xth_discrete};
use fdrelay::{
    capacity, hd_capacity, normalize_scenario, rate_to_bps, DiscreteDistribution, GaussianMixture,
    LinkScenario, MassPoint, NormalizedChannel, Regime, RelayInputDistribution, SolverConfig,
    SourcePolicy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<(bool, String), fdrelay::Error>;
type Criterion = (&'static str, fn() -> Outcome);

/// Accumulates sub-checks of one criterion.
#[derive(Default)]
struct Checks {
    ok: bool,
    detail: String,
}

impl Checks {
    fn new() -> Self {
        Checks {
            ok: true,
            detail: String::new(),
        }
    }

    fn add(&mut self, pass: bool, what: impl std::fmt::Display) {
        self.ok &= pass;
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        let _ = write!(self.detail, "{what} [{}]", if pass { "ok" } else { "MISS" });
    }

    fn done(self) -> Outcome {
        Ok((self.ok, self.detail))
    }
}

fn scenario(f: impl FnOnce(&mut LinkScenario)) -> LinkScenario {
    let mut s = LinkScenario::reference();
    f(&mut s);
    s
}

fn channel(s: &LinkScenario) -> NormalizedChannel {
    normalize_scenario(s).expect("valid scenario")
}

fn powers(db: f64) -> impl FnOnce(&mut LinkScenario) {
    move |s| {
        s.p_s_dbm = db;
        s.p_r_dbm = db;
    }
}

fn reference_distribution() -> Outcome {
    let cfg = SolverConfig::default();
    let ch = channel(&LinkScenario::reference());
    let start = Instant::now();
    let res = capacity(&ch, &cfg)?;
    let elapsed = start.elapsed();
    let fine = capacity(
        &ch,
        &SolverConfig {
            grid_points: 2 * cfg.grid_points - 1,
            ..cfg.clone()
        },
    )?;

    let mut c = Checks::new();
    c.add(
        res.regime == Regime::Discrete && res.discrete().is_some(),
        format!("regime {}", res.regime),
    );
    let p0 = res.p_silent();
    c.add(
        (p0 - 0.40).abs() <= 0.03,
        format!("p(x_R=0) = {p0:.4} vs 0.40 +- 0.03"),
    );
    c.add(
        (res.p_transmit - 0.96).abs() <= 0.02,
        format!("p_T = {:.4} vs 0.96 +- 0.02", res.p_transmit),
    );
    let ratio = res.x_th / fine.x_th;
    c.add(
        (ratio - 1.0).abs() <= 1e-2,
        format!(
            "x_th ratio across grid refinement = {ratio:.5} (x_th*sqrt(P_R) = {:.4} and {:.4})",
            res.x_th * ch.p_r.sqrt(),
            fine.x_th * ch.p_r.sqrt()
        ),
    );
    let resid = res.diagnostics.xth_residual;
    c.add(
        resid <= 1e-9,
        format!("threshold residual {resid:.1e} relative to P_S"),
    );
    c.add(
        elapsed <= Duration::from_secs(60),
        format!("runtime {:.2} s", elapsed.as_secs_f64()),
    );
    c.done()
}

fn relay_destination_ceiling() -> Outcome {
    let cfg = SolverConfig::default();
    let base = scenario(|s| {
        s.d_rd = 300.0;
        s.p_r_dbm = 25.0;
    });
    let ch = channel(&base);
    let ceiling_bits = awgn_capacity(ch.p_r / ch.sigma_d_sq);
    let ceiling = rate_to_bps(ceiling_bits, base.bandwidth) * 1e-6;

    let start = Instant::now();
    let points: Vec<f64> = (0..30).map(|k| 10.0 + 50.0 * k as f64 / 29.0).collect();
    let rates: Vec<fdrelay::Result<f64>> = points
        .par_iter()
        .map(|&p| {
            let ch = channel(&scenario(|s| {
                *s = base.clone();
                s.p_s_dbm = p;
            }));
            capacity(&ch, &cfg).map(|r| r.capacity)
        })
        .collect();
    let elapsed = start.elapsed();
    let rates = rates.into_iter().collect::<fdrelay::Result<Vec<_>>>()?;
    let worst = rates
        .iter()
        .map(|r| r - ceiling_bits)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut c = Checks::new();
    c.add(
        (ceiling - 1.84).abs() <= 0.02,
        format!("ceiling {ceiling:.4} Mbps vs 1.84 +- 0.02"),
    );
    c.add(
        worst <= 1e-9,
        format!("max C_FD - ceiling over P_S in [10, 60] dBm = {worst:.2e} bits"),
    );
    c.add(
        elapsed <= Duration::from_secs(300),
        format!("30-point sweep in {:.1} s", elapsed.as_secs_f64()),
    );
    c.done()
}

fn gain(sup_db: f64, p_dbm: f64, cfg: &SolverConfig) -> fdrelay::Result<f64> {
    let ch = channel(&scenario(|s| {
        powers(p_dbm)(s);
        s.si_suppression_db = sup_db;
    }));
    let fd = capacity(&ch, cfg)?.capacity;
    let hd = hd_capacity(&ch, cfg)?.capacity;
    Ok(fd / hd - 1.0)
}

fn gain_over_half_duplex() -> Outcome {
    let cfg = SolverConfig::default();
    let g120 = gain(120.0, 25.0, &cfg)?;
    let g130 = gain(130.0, 25.0, &cfg)?;
    let high: Vec<(f64, f64)> = [25.0, 30.0, 35.0, 40.0]
        .par_iter()
        .map(|&p| gain(150.0, p, &cfg).map(|g| (p, g)))
        .collect::<fdrelay::Result<_>>()?;
    let (p_best, g150) =
        high.iter().copied().fold(
            (0.0, f64::NEG_INFINITY),
            |a, b| if b.1 > a.1 { b } else { a },
        );

    let mut c = Checks::new();
    c.add(
        (g120 - 0.05).abs() <= 0.02,
        format!("120 dB: {:.2}% vs 5 +- 2", 100.0 * g120),
    );
    c.add(
        (0.08..=0.18).contains(&g130),
        format!("130 dB: {:.2}% in [8, 18]", 100.0 * g130),
    );
    let list: Vec<String> = high
        .iter()
        .map(|(p, g)| format!("{p} dBm {:.1}%", 100.0 * g))
        .collect();
    c.add(
        g150 >= 0.50,
        format!(
            "150 dB best {:.2}% at {p_best} dBm, >= 50 ({})",
            100.0 * g150,
            list.join(", ")
        ),
    );
    c.done()
}

fn lower_bound_tightness() -> Outcome {
    let cfg = SolverConfig::default();
    let rows: Vec<(f64, f64, f64)> = [15.0, 20.0, 25.0, 30.0, 35.0]
        .par_iter()
        .map(|&p| {
            let ch = channel(&scenario(powers(p)));
            let c = capacity(&ch, &cfg)?.capacity;
            let lb = solve_lowerbound(&ch, &cfg)?.rate;
            Ok((p, c, lb))
        })
        .collect::<fdrelay::Result<_>>()?;
    let mut c = Checks::new();
    for (p, cap, lb) in rows {
        c.add(
            lb >= 0.98 * cap && lb <= cap + 1e-6,
            format!("{p} dBm: R_B/C = {:.4}", lb / cap),
        );
    }
    c.done()
}

fn limits() -> Outcome {
    let cfg = SolverConfig::default();
    let ch = channel(&scenario(|s| s.si_suppression_db = 200.0));
    let c200 = capacity(&ch, &cfg)?.capacity;
    let ideal = benchmark_suite(&ch, &cfg)?.c_fd_ideal;
    let ch = channel(&scenario(|s| s.si_suppression_db = 40.0));
    let c40 = capacity(&ch, &cfg)?.capacity;
    let hd = hd_capacity(&ch, &cfg)?.capacity;

    let mut c = Checks::new();
    c.add(
        (c200 - ideal).abs() <= 1e-3,
        format!("200 dB: |C - C_ideal| = {:.2e}", (c200 - ideal).abs()),
    );
    c.add(
        (c40 - hd).abs() <= 1e-3,
        format!("40 dB: |C - C_HD| = {:.2e}", (c40 - hd).abs()),
    );
    c.done()
}

struct Instance {
    ordering: bool,
    monotone: bool,
    balance: Option<f64>,
    kkt: Option<f64>,
    residual: f64,
}

fn random_instance(seed: u64, cfg: &SolverConfig) -> fdrelay::Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = scenario(|s| {
        s.d_sr = rng.random_range(300.0..700.0);
        s.d_rd = rng.random_range(300.0..700.0);
        s.p_s_dbm = rng.random_range(15.0..35.0);
        s.p_r_dbm = rng.random_range(15.0..35.0);
        s.si_suppression_db = rng.random_range(110.0..150.0);
    });
    let ch = channel(&s);
    let res = capacity(&ch, cfg)?;
    let b = benchmark_suite(&ch, cfg)?;
    let tol = 1e-6;
    let ordering = b.r_hd_conv <= b.c_hd + tol
        && b.c_hd <= res.capacity + tol
        && res.capacity <= b.c_fd_ideal + tol
        && b.r_fd_conv <= res.capacity + tol;

    let more = capacity(&ch.with_alpha(ch.alpha * 2.0), cfg)?.capacity;
    let less = capacity(&ch.with_alpha(ch.alpha * 0.5), cfg)?.capacity;
    let monotone = more <= res.capacity + tol && res.capacity <= less + tol;

    let balance = (res.regime == Regime::Discrete).then(|| (res.mi_sr - res.mi_rd).abs());
    let kkt = res.kkt.as_ref().map(|k| k.stationarity_on_support);
    let lb = solve_lowerbound(&ch, cfg)?;
    let residual = res.diagnostics.xth_residual.max(lb.power_residual);
    Ok(Instance {
        ordering,
        monotone,
        balance,
        kkt,
        residual,
    })
}

fn property_suite() -> Outcome {
    let cfg = SolverConfig::default();
    let runs: Vec<Instance> = (0..20u64)
        .into_par_iter()
        .map(|i| random_instance(0xacce_0000 + i, &cfg))
        .collect::<fdrelay::Result<_>>()?;
    let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);

    let mut c = Checks::new();
    let ordered = runs.iter().filter(|r| r.ordering).count();
    c.add(
        ordered == runs.len(),
        format!("ordering chain {ordered}/20"),
    );
    let monotone = runs.iter().filter(|r| r.monotone).count();
    c.add(
        monotone == runs.len(),
        format!("monotone in alpha {monotone}/20"),
    );
    let discrete = runs.iter().filter(|r| r.balance.is_some()).count();
    let balance = max(runs.iter().filter_map(|r| r.balance).collect());
    c.add(
        balance <= 1e-4,
        format!("max rate imbalance {balance:.1e} bits over {discrete} discrete"),
    );
    let kkt = max(runs.iter().filter_map(|r| r.kkt).collect());
    c.add(
        kkt <= 1e-4,
        format!("max on-support stationarity {kkt:.1e}"),
    );
    let residual = max(runs.iter().map(|r| r.residual).collect());
    c.add(
        residual <= 1e-9,
        format!("max threshold residual {residual:.1e}"),
    );
    c.done()
}

/// Relay inputs on the solver grid that meet the power constraint.
fn random_feasible(rng: &mut ChaCha8Rng, grid: &[f64], p_r: f64) -> DiscreteDistribution {
    let sparse = rng.random_bool(0.5);
    let k = if sparse {
        rng.random_range(1..=8)
    } else {
        grid.len()
    };
    let mut w = vec![0.0; grid.len()];
    for _ in 0..k {
        let i = if sparse {
            rng.random_range(0..grid.len())
        } else {
            w.iter().position(|&v| v == 0.0).unwrap()
        };
        w[i] += -rng.random::<f64>().max(1e-300).ln();
    }
    let total: f64 = w.iter().sum();
    let m2: f64 = w.iter().zip(grid).map(|(p, x)| p / total * x * x).sum();
    let scale = if m2 > p_r { p_r / m2 } else { 1.0 };
    let mut p: Vec<f64> = w.iter().map(|v| scale * v / total).collect();
    p[0] += 1.0 - scale;
    DiscreteDistribution::from_grid(grid, &p, 0.0).expect("valid distribution")
}

/// Masses of `d` on the amplitudes of `grid`.
fn on_grid(d: &DiscreteDistribution, grid: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; grid.len()];
    for m in d.points() {
        let j = grid
            .iter()
            .position(|&g| g == m.x)
            .expect("mass on the grid");
        p[j] += m.p;
    }
    p
}

fn oracle_equivalence() -> Outcome {
    let cfg = SolverConfig::default();
    let mc = McConfig {
        samples: 1_000_000,
        ..McConfig::default()
    };
    let q = QuadratureSpec::adaptive(1e-10);
    let mut c = Checks::new();
    let mut agree = |name: &str, quad: f64, est: fdrelay::mcoracle::McEstimate| {
        let z = (est.estimate - quad) / est.stderr;
        c.add(est.agrees_with(quad, 3.0), format!("{name} z={z:+.2}"));
    };

    let unit = GaussianMixture::gaussian(0.0, 1.0)?;
    agree("h(N(0,1))", gaussian_entropy(1.0), mc_entropy(&unit, &mc)?);
    let bg = RelayInputDistribution::BernoulliGaussian {
        q: 0.5,
        p_r_used: 10.0,
    };
    let mix = bg.output_mixture(1.0)?;
    agree(
        "h(BG output)",
        mixture_entropy(&mix, &q)?,
        mc_entropy(&mix, &mc)?,
    );

    let unit_ch = NormalizedChannel::new(1.0, 0.5, 1.0, 1.0, 1.0)?;
    let input = BernoulliGaussian::new(0.5, 0.5)?;
    let x_th = input.threshold(&unit_ch)?;
    let quad = lb_mi_source_relay(&input, x_th, &unit_ch, &q)?;
    let policy = SourcePolicy {
        x_th,
        alpha: 1.0,
        p_s: 1.0,
    };
    for (mode, tag) in [(SrMode::State, "state"), (SrMode::LikelihoodRatio, "llr")] {
        agree(
            &format!("BG I_SR {tag}"),
            quad,
            mc_mi_source_relay(&input.distribution(), &policy, 1.0, mode, &mc)?,
        );
    }

    let ch = channel(&LinkScenario::reference());
    let res = capacity(&ch, &cfg)?;
    let policy = SourcePolicy {
        x_th: res.x_th,
        alpha: ch.alpha,
        p_s: ch.p_s,
    };
    for (mode, tag) in [(SrMode::State, "state"), (SrMode::LikelihoodRatio, "llr")] {
        agree(
            &format!("optimum I_SR {tag}"),
            res.mi_sr,
            mc_mi_source_relay(&res.dist, &policy, ch.sigma_r_sq, mode, &mc)?,
        );
    }
    let mix = res.dist.output_mixture(ch.sigma_d_sq)?;
    agree(
        "optimum h(Y_D)",
        res.mi_rd + gaussian_entropy(ch.sigma_d_sq),
        mc_entropy(&mix, &mc)?,
    );
    let lb = solve_lowerbound(&ch, &cfg)?;
    let mix = lb.input.distribution().output_mixture(ch.sigma_d_sq)?;
    agree(
        "lower-bound h(Y_D)",
        lb.mi_rd + gaussian_entropy(ch.sigma_d_sq),
        mc_entropy(&mix, &mc)?,
    );
    let three = DiscreteDistribution::new(vec![
        MassPoint { x: 0.0, p: 0.5 },
        MassPoint { x: 1.0, p: 0.5 },
    ])?;
    let x_th = solve_xth_discrete(&three, 1.0, 1.0)?;
    let dist = RelayInputDistribution::Discrete { points: three };
    let quad = mi_source_relay(&dist, x_th, 1.0, 1.0, 1.0, &q)?;
    let est = mc_mi_source_relay(
        &dist,
        &SourcePolicy {
            x_th,
            alpha: 1.0,
            p_s: 1.0,
        },
        1.0,
        SrMode::State,
        &mc,
    )?;
    agree("three-point I_SR", quad, est);

    for (name, s) in [
        ("reference", LinkScenario::reference()),
        ("120 dB", scenario(|s| s.si_suppression_db = 120.0)),
    ] {
        let ch = channel(&s);
        let res = capacity(&ch, &cfg)?;
        let best = res.capacity;
        let grid = amplitude_grid(ch.p_r, &cfg);
        let p_opt = on_grid(res.discrete().expect("discrete optimum"), &grid);
        let worst = (0..10_000u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(0xd0_0000 + i);
                let far = random_feasible(&mut rng, &grid, ch.p_r);
                // Half the draws are small steps away from the optimum.
                let d = if i % 2 == 0 {
                    far
                } else {
                    let eps = 10f64.powf(rng.random_range(-4.0..-1.0));
                    let q = on_grid(&far, &grid);
                    let mix: Vec<f64> = p_opt
                        .iter()
                        .zip(&q)
                        .map(|(a, b)| (1.0 - eps) * a + eps * b)
                        .collect();
                    DiscreteDistribution::from_grid(&grid, &mix, 0.0).expect("valid distribution")
                };
                discrete_rates(&ch, &d, &cfg).map(|(sr, rd)| sr.min(rd) - best)
            })
            .collect::<fdrelay::Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        c.add(
            worst <= 1e-6,
            format!("{name}: 1e4 feasible draws, max excess over C {worst:.2e}"),
        );
    }
    c.done()
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("reference distribution", reference_distribution),
        ("relay-destination ceiling", relay_destination_ceiling),
        ("gain over half duplex", gain_over_half_duplex),
        ("lower-bound tightness", lower_bound_tightness),
        ("limit consistency", limits),
        ("property suite", property_suite),
        ("oracle equivalence", oracle_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {} ({name}, {:.1} s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
