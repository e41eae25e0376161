mod report;
mod sweep;
mod validate;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fdrelay::{Error, ScenarioConfig, SweepSpec, SweepVariable};

#[derive(Parser)]
#[command(
    name = "fdrelay",
    version,
    about = "Capacity of the two-hop full-duplex relay channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (.toml or .json).
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Units {
    /// Bits per real symbol.
    #[default]
    Bits,
    /// Megabits per second.
    Mbps,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity, optimal relay input and reference rates for one scenario.
    Capacity(Common),
    /// Sweep one scenario parameter and tabulate all rates.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Overrides the variable of the `[sweep]` table.
        #[arg(long)]
        variable: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        start: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        stop: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Tie the source and relay powers together.
        #[arg(long)]
        linked: bool,
        #[arg(long, value_enum, default_value_t = Units::Bits)]
        units: Units,
        /// Also write a gnuplot script for the CSV to this path.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
    /// Optimal relay mass points as CSV.
    Distribution(Common),
    /// Reference schemes only.
    Benchmarks(Common),
    /// Compare quadrature values with Monte Carlo estimates.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo sample count per check.
        #[arg(long)]
        samples: Option<usize>,
    },
}

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    pub fn io(e: impl std::fmt::Display) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

pub fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(Failure::io),
    }
}

fn sweep_spec(
    cfg: &ScenarioConfig,
    variable: Option<String>,
    start: Option<f64>,
    stop: Option<f64>,
    steps: Option<usize>,
    linked: bool,
) -> Result<SweepSpec, Failure> {
    let base = cfg.sweep;
    let variable = match variable {
        Some(v) => v.parse::<SweepVariable>()?,
        None => base
            .map(|b| b.variable)
            .ok_or_else(|| missing("variable"))?,
    };
    let spec = SweepSpec {
        variable,
        start: start
            .or(base.map(|b| b.start))
            .ok_or_else(|| missing("start"))?,
        stop: stop
            .or(base.map(|b| b.stop))
            .ok_or_else(|| missing("stop"))?,
        steps: steps
            .or(base.map(|b| b.steps))
            .ok_or_else(|| missing("steps"))?,
        linked: linked || base.is_some_and(|b| b.linked),
    };
    spec.validate()?;
    Ok(spec)
}

fn missing(field: &str) -> Failure {
    Failure {
        code: 2,
        message: format!("sweep {field} not given on the command line or in [sweep]"),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Capacity(c) => {
            let cfg = ScenarioConfig::load(&c.config)?;
            let rep = report::capacity_report(&cfg)?;
            let text = match c.format.unwrap_or(Format::Json) {
                Format::Json => report::to_json(&rep)?,
                Format::Csv => report::capacity_csv(&rep)?,
            };
            write_output(c.out.as_deref(), &text)
        }
        Command::Sweep {
            common,
            variable,
            start,
            stop,
            steps,
            linked,
            units,
            gnuplot,
        } => {
            let cfg = ScenarioConfig::load(&common.config)?;
            let spec = sweep_spec(&cfg, variable, start, stop, steps, linked)?;
            let rows = sweep::run_sweep(&cfg, &spec, units);
            let text = match common.format.unwrap_or(Format::Csv) {
                Format::Csv => sweep::to_csv(&rows)?,
                Format::Json => report::to_json(&rows)?,
            };
            write_output(common.out.as_deref(), &text)?;
            if let Some(path) = gnuplot {
                let data = common
                    .out
                    .as_deref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "sweep.csv".into());
                let script = sweep::gnuplot_script(&data, &spec, units);
                write_output(Some(&path), &script)?;
            }
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                for r in rows
                    .iter()
                    .filter_map(|r| r.error.as_ref().map(|e| (r.sweep_value, e)))
                {
                    eprintln!("row {}: {}", r.0, r.1);
                }
                return Err(Failure {
                    code: 1,
                    message: format!("{failed} of {} sweep rows failed", rows.len()),
                });
            }
            Ok(())
        }
        Command::Distribution(c) => {
            let cfg = ScenarioConfig::load(&c.config)?;
            let rep = report::capacity_report(&cfg)?;
            let text = match c.format.unwrap_or(Format::Csv) {
                Format::Csv => report::distribution_csv(&rep)?,
                Format::Json => report::to_json(&rep.distribution)?,
            };
            write_output(c.out.as_deref(), &text)
        }
        Command::Benchmarks(c) => {
            let cfg = ScenarioConfig::load(&c.config)?;
            let rep = report::benchmark_report(&cfg)?;
            let text = match c.format.unwrap_or(Format::Json) {
                Format::Json => report::to_json(&rep)?,
                Format::Csv => report::benchmarks_csv(&rep)?,
            };
            write_output(c.out.as_deref(), &text)
        }
        Command::Validate {
            common,
            seed,
            samples,
        } => {
            let cfg = ScenarioConfig::load(&common.config)?;
            let mut mc = cfg.mc.unwrap_or_default();
            if let Some(s) = seed {
                mc.seed = s;
            }
            if let Some(n) = samples {
                mc.samples = n;
            }
            mc.validate()?;
            let checks = validate::run_checks(&cfg, &mc)?;
            let text = match common.format.unwrap_or(Format::Csv) {
                Format::Csv => validate::to_csv(&checks)?,
                Format::Json => report::to_json(&checks)?,
            };
            write_output(common.out.as_deref(), &text)?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            if failed > 0 {
                return Err(Failure {
                    code: 1,
                    message: format!("{failed} of {} oracle checks failed", checks.len()),
                });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
