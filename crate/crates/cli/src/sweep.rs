//! Parameter sweeps.

use fdrelay::{rate_to_bps, ScenarioConfig, SweepSpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::report::{fmt_num, Solved};
use crate::{Failure, Units};

pub const HEADER: [&str; 11] = [
    "sweep_value",
    "c_fd",
    "r_fd_b",
    "c_fd_ideal",
    "r_fd_conv",
    "c_hd",
    "r_hd_conv",
    "regime",
    "x_th",
    "p0",
    "p_T",
];

#[derive(Debug, Clone, Default, Serialize)]
pub struct Row {
    pub sweep_value: f64,
    pub c_fd: Option<f64>,
    pub r_fd_b: Option<f64>,
    pub c_fd_ideal: Option<f64>,
    pub r_fd_conv: Option<f64>,
    pub c_hd: Option<f64>,
    pub r_hd_conv: Option<f64>,
    pub regime: Option<String>,
    pub x_th: Option<f64>,
    pub p0: Option<f64>,
    #[serde(rename = "p_T")]
    pub p_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn row(cfg: &ScenarioConfig, spec: &SweepSpec, value: f64, units: Units) -> Row {
    let scenario = spec.apply(&cfg.scenario, value);
    let scale = match units {
        Units::Bits => 1.0,
        Units::Mbps => rate_to_bps(1.0, scenario.bandwidth) * 1e-6,
    };
    let solved = scenario
        .validate()
        .and_then(|()| Solved::compute(&scenario, &cfg.solver));
    match solved {
        Ok(s) => Row {
            sweep_value: value,
            c_fd: Some(s.result.capacity * scale),
            r_fd_b: Some(s.r_fd_b() * scale),
            c_fd_ideal: Some(s.bench.c_fd_ideal * scale),
            r_fd_conv: Some(s.bench.r_fd_conv * scale),
            c_hd: Some(s.bench.c_hd * scale),
            r_hd_conv: Some(s.bench.r_hd_conv * scale),
            regime: Some(s.result.regime.to_string()),
            x_th: Some(s.result.x_th),
            p0: Some(s.result.p_silent()),
            p_t: Some(s.result.p_transmit),
            error: None,
        },
        Err(e) => Row {
            sweep_value: value,
            error: Some(e.to_string()),
            ..Default::default()
        },
    }
}

/// Rows in sweep order; they are computed concurrently.
pub fn run_sweep(cfg: &ScenarioConfig, spec: &SweepSpec, units: Units) -> Vec<Row> {
    spec.values()
        .into_par_iter()
        .map(|v| row(cfg, spec, v, units))
        .collect()
}

pub fn to_csv(rows: &[Row]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let cell = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    w.write_record(HEADER).map_err(Failure::io)?;
    for r in rows {
        let rec = [
            fmt_num(r.sweep_value),
            cell(r.c_fd),
            cell(r.r_fd_b),
            cell(r.c_fd_ideal),
            cell(r.r_fd_conv),
            cell(r.c_hd),
            cell(r.r_hd_conv),
            r.regime.clone().unwrap_or_default(),
            cell(r.x_th),
            cell(r.p0),
            cell(r.p_t),
        ];
        w.write_record(&rec).map_err(Failure::io)?;
    }
    let bytes = w.into_inner().map_err(Failure::io)?;
    String::from_utf8(bytes).map_err(Failure::io)
}

/// Plots every rate column of the CSV against the swept variable.
pub fn gnuplot_script(data: &str, spec: &SweepSpec, units: Units) -> String {
    let ylabel = match units {
        Units::Bits => "rate (bits/symbol)",
        Units::Mbps => "rate (Mbps)",
    };
    let series = [
        (2, "C_FD"),
        (3, "R_FD,B"),
        (4, "C_FD,ideal"),
        (5, "R_FD,conv"),
        (6, "C_HD"),
        (7, "R_HD,conv"),
    ];
    let plots: Vec<String> = series
        .iter()
        .map(|(col, name)| format!("'{data}' using 1:{col} with linespoints title '{name}'"))
        .collect();
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset key left top\nset grid\n\
         set xlabel '{}'\nset ylabel '{ylabel}'\nplot {}\n",
        spec.variable.as_str(),
        plots.join(", \\\n     ")
    )
}
