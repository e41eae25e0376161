//! Single-scenario reports.

use fdrelay::benchmarks::benchmark_suite;
use fdrelay::lowerbound::solve_lowerbound;
use fdrelay::{
    capacity, normalize_scenario, rate_to_bps, BenchmarkSuite, CapacityResult, KktReport,
    LinkScenario, LowerBound, NormalizedChannel, RelayInputDistribution, ScenarioConfig,
    SolverConfig,
};
use serde::Serialize;

use crate::Failure;

/// A rate in bits per real symbol and in Mbps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Rate {
    pub bits: f64,
    pub mbps: f64,
}

impl Rate {
    pub fn new(bits: f64, bandwidth: f64) -> Self {
        Rate {
            bits,
            mbps: rate_to_bps(bits, bandwidth) * 1e-6,
        }
    }
}

/// Every quantity computed for one scenario.
pub struct Solved {
    pub channel: NormalizedChannel,
    pub result: CapacityResult,
    /// Absent without self-interference, where a Gaussian input is optimal.
    pub lower_bound: Option<LowerBound>,
    pub bench: BenchmarkSuite,
}

impl Solved {
    pub fn compute(scenario: &LinkScenario, solver: &SolverConfig) -> fdrelay::Result<Self> {
        let channel = normalize_scenario(scenario)?;
        let result = capacity(&channel, solver)?;
        let lower_bound = if channel.alpha > 0.0 {
            Some(solve_lowerbound(&channel, solver)?)
        } else {
            None
        };
        let bench = benchmark_suite(&channel, solver)?;
        Ok(Solved {
            channel,
            result,
            lower_bound,
            bench,
        })
    }

    /// Best Bernoulli-Gaussian rate; the capacity itself when interference is absent.
    pub fn r_fd_b(&self) -> f64 {
        self.lower_bound
            .as_ref()
            .map_or(self.result.capacity, |lb| lb.rate)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignedMass {
    pub x: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionReport {
    /// Mass points with each `+-x` pair listed separately.
    Discrete {
        points: Vec<SignedMass>,
        x_th: Option<f64>,
    },
    Gaussian {
        variance: f64,
        x_th: Option<f64>,
    },
    BernoulliGaussian {
        q: f64,
        p_r_used: f64,
        x_th: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundReport {
    pub rate: Rate,
    pub q: f64,
    pub p_r_used: f64,
    pub x_th: f64,
    pub fallback: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkReport {
    pub c_fd_ideal: Rate,
    pub r_fd_conv: Rate,
    pub c_hd: Rate,
    pub r_hd_conv: Rate,
    pub t_opt: f64,
    pub p_r_opt_conv: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityReport {
    pub scenario: LinkScenario,
    pub channel: NormalizedChannel,
    pub capacity: Rate,
    pub regime: String,
    /// `null` when the threshold is infinite (no self-interference).
    pub x_th: Option<f64>,
    pub p_silent: f64,
    pub p_transmit: f64,
    pub mi_sr: Rate,
    pub mi_rd: Rate,
    pub distribution: DistributionReport,
    pub lower_bound: Option<LowerBoundReport>,
    pub benchmarks: BenchmarkReport,
    pub converged: bool,
    pub kkt: Option<KktReport>,
    pub diagnostics: fdrelay::relay_opt::SolverDiagnostics,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn distribution_report(res: &CapacityResult) -> DistributionReport {
    let x_th = finite(res.x_th);
    match &res.dist {
        RelayInputDistribution::Discrete { points } => DistributionReport::Discrete {
            points: points
                .atoms()
                .into_iter()
                .map(|(x, p)| SignedMass { x, p })
                .collect(),
            x_th,
        },
        RelayInputDistribution::Gaussian { variance } => DistributionReport::Gaussian {
            variance: *variance,
            x_th,
        },
        RelayInputDistribution::BernoulliGaussian { q, p_r_used } => {
            DistributionReport::BernoulliGaussian {
                q: *q,
                p_r_used: *p_r_used,
                x_th,
            }
        }
    }
}

fn bench_report(b: &BenchmarkSuite, bw: f64) -> BenchmarkReport {
    BenchmarkReport {
        c_fd_ideal: Rate::new(b.c_fd_ideal, bw),
        r_fd_conv: Rate::new(b.r_fd_conv, bw),
        c_hd: Rate::new(b.c_hd, bw),
        r_hd_conv: Rate::new(b.r_hd_conv, bw),
        t_opt: b.t_opt,
        p_r_opt_conv: b.p_r_opt_conv,
    }
}

pub fn capacity_report(cfg: &ScenarioConfig) -> Result<CapacityReport, Failure> {
    let s = Solved::compute(&cfg.scenario, &cfg.solver)?;
    let bw = cfg.scenario.bandwidth;
    let r = &s.result;
    Ok(CapacityReport {
        scenario: cfg.scenario.clone(),
        channel: s.channel,
        capacity: Rate::new(r.capacity, bw),
        regime: r.regime.to_string(),
        x_th: finite(r.x_th),
        p_silent: r.p_silent(),
        p_transmit: r.p_transmit,
        mi_sr: Rate::new(r.mi_sr, bw),
        mi_rd: Rate::new(r.mi_rd, bw),
        distribution: distribution_report(r),
        lower_bound: s.lower_bound.as_ref().map(|lb| LowerBoundReport {
            rate: Rate::new(lb.rate, bw),
            q: lb.input.q,
            p_r_used: lb.input.p_r_used,
            x_th: lb.x_th,
            fallback: lb.fallback,
        }),
        benchmarks: bench_report(&s.bench, bw),
        converged: r.converged,
        kkt: r.kkt.clone(),
        diagnostics: r.diagnostics.clone(),
    })
}

pub fn benchmark_report(cfg: &ScenarioConfig) -> Result<BenchmarkReport, Failure> {
    let ch = normalize_scenario(&cfg.scenario)?;
    let b = benchmark_suite(&ch, &cfg.solver)?;
    Ok(bench_report(&b, cfg.scenario.bandwidth))
}

pub fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(Failure::io)?;
    s.push('\n');
    Ok(s)
}

fn csv_string(
    f: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    f(&mut w).map_err(Failure::io)?;
    let bytes = w.into_inner().map_err(Failure::io)?;
    String::from_utf8(bytes).map_err(Failure::io)
}

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x > 0.0 {
        "inf".into()
    } else {
        format!("{x}")
    }
}

/// `quantity,value` rows.
pub fn capacity_csv(rep: &CapacityReport) -> Result<String, Failure> {
    let b = &rep.benchmarks;
    let mut rows: Vec<(&str, String)> = vec![
        ("capacity_bits", fmt_num(rep.capacity.bits)),
        ("capacity_mbps", fmt_num(rep.capacity.mbps)),
        ("regime", rep.regime.clone()),
        ("x_th", rep.x_th.map_or("inf".into(), fmt_num)),
        ("p_silent", fmt_num(rep.p_silent)),
        ("p_transmit", fmt_num(rep.p_transmit)),
        ("mi_sr_bits", fmt_num(rep.mi_sr.bits)),
        ("mi_rd_bits", fmt_num(rep.mi_rd.bits)),
    ];
    if let Some(lb) = &rep.lower_bound {
        rows.push(("r_fd_b_bits", fmt_num(lb.rate.bits)));
    }
    rows.extend([
        ("c_fd_ideal_bits", fmt_num(b.c_fd_ideal.bits)),
        ("r_fd_conv_bits", fmt_num(b.r_fd_conv.bits)),
        ("c_hd_bits", fmt_num(b.c_hd.bits)),
        ("r_hd_conv_bits", fmt_num(b.r_hd_conv.bits)),
    ]);
    csv_string(|w| {
        w.write_record(["quantity", "value"])?;
        for (k, v) in &rows {
            w.write_record([*k, v.as_str()])?;
        }
        Ok(())
    })
}

/// `kind,x,p` rows: one per signed mass point, then the threshold. A Gaussian
/// input is a single `gaussian` row carrying its variance in the `x` column.
pub fn distribution_csv(rep: &CapacityReport) -> Result<String, Failure> {
    let threshold = |x: Option<f64>| x.map_or("inf".to_string(), fmt_num);
    csv_string(|w| {
        w.write_record(["kind", "x", "p"])?;
        match &rep.distribution {
            DistributionReport::Discrete { points, x_th } => {
                for m in points {
                    w.write_record(["mass", &fmt_num(m.x), &fmt_num(m.p)])?;
                }
                w.write_record(["threshold", &threshold(*x_th), ""])?;
            }
            DistributionReport::Gaussian { variance, x_th } => {
                w.write_record(["gaussian", &fmt_num(*variance), "1"])?;
                w.write_record(["threshold", &threshold(*x_th), ""])?;
            }
            DistributionReport::BernoulliGaussian { q, p_r_used, x_th } => {
                w.write_record(["mass", "0", &fmt_num(1.0 - q)])?;
                w.write_record(["gaussian", &fmt_num(p_r_used / q), &fmt_num(*q)])?;
                w.write_record(["threshold", &threshold(*x_th), ""])?;
            }
        }
        Ok(())
    })
}

pub fn benchmarks_csv(b: &BenchmarkReport) -> Result<String, Failure> {
    csv_string(|w| {
        w.write_record(["scheme", "bits", "mbps"])?;
        for (name, r) in [
            ("c_fd_ideal", b.c_fd_ideal),
            ("r_fd_conv", b.r_fd_conv),
            ("c_hd", b.c_hd),
            ("r_hd_conv", b.r_hd_conv),
        ] {
            w.write_record([name, &fmt_num(r.bits), &fmt_num(r.mbps)])?;
        }
        Ok(())
    })
}
