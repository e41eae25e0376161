//! Scenario files.
//!
//! A file holds a `[scenario]` table with the [`LinkScenario`] fields and
//! optional `[solver]`, `[sweep]` and `[mc]` tables. TOML and JSON are
//! supported and chosen by file extension.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkbudget::LinkScenario;
use crate::mcoracle::McConfig;
use crate::relay_opt::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: LinkScenario,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
}

/// Scenario field varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    PSDbm,
    PRDbm,
    SiSuppressionDb,
    DRd,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::PSDbm => "p_s_dbm",
            Self::PRDbm => "p_r_dbm",
            Self::SiSuppressionDb => "si_suppression_db",
            Self::DRd => "d_rd",
        }
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p_s_dbm" => Ok(Self::PSDbm),
            "p_r_dbm" => Ok(Self::PRDbm),
            "si_suppression_db" => Ok(Self::SiSuppressionDb),
            "d_rd" => Ok(Self::DRd),
            other => Err(Error::Config(format!(
                "unknown sweep variable `{other}` (expected p_s_dbm, p_r_dbm, si_suppression_db or d_rd)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    /// Keep `p_s_dbm == p_r_dbm` while sweeping either power.
    #[serde(default)]
    pub linked: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::Config(format!(
                "sweep.steps must be at least 2, got {}",
                self.steps
            )));
        }
        if !(self.start < self.stop) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::Config(format!(
                "sweep needs finite start < stop, got {} and {}",
                self.start, self.stop
            )));
        }
        if self.linked && !matches!(self.variable, SweepVariable::PSDbm | SweepVariable::PRDbm) {
            return Err(Error::Config(
                "sweep.linked applies only to p_s_dbm or p_r_dbm".into(),
            ));
        }
        Ok(())
    }

    /// Evenly spaced values from `start` to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / last
                }
            })
            .collect()
    }

    /// `base` with the swept variable set to `value`.
    pub fn apply(&self, base: &LinkScenario, value: f64) -> LinkScenario {
        let mut s = base.clone();
        match self.variable {
            SweepVariable::PSDbm => s.p_s_dbm = value,
            SweepVariable::PRDbm => s.p_r_dbm = value,
            SweepVariable::SiSuppressionDb => s.si_suppression_db = value,
            SweepVariable::DRd => s.d_rd = value,
        }
        if self.linked {
            s.p_s_dbm = value;
            s.p_r_dbm = value;
        }
        s
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.solver.validate()?;
        if let Some(sw) = &self.sweep {
            sw.validate()?;
        }
        if let Some(mc) = &self.mc {
            mc.validate()?;
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a `.toml` or `.json` file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text),
            Some("json") => Self::from_json_str(&text),
            _ => {
                return Err(Error::Config(format!(
                    "{}: expected a .toml or .json file",
                    path.display()
                )))
            }
        };
        parsed.map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}
