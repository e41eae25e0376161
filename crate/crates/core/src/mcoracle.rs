//! Monte Carlo estimators used to cross-check the quadrature values.
//!
//! Samples are split into batches; batch `b` draws from a ChaCha8 stream
//! seeded with the configured seed and stream id `b`, so results do not
//! depend on how batches are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::RelayInputDistribution;
use crate::error::{Error, Result};
use crate::numerics::GaussianMixture;
use crate::scalar::Real;
use crate::source_policy::{source_power, SourcePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub batches: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 0x5eed,
            batches: 100,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 10_000 {
            return Err(Error::Config(format!(
                "samples must be at least 10000, got {}",
                self.samples
            )));
        }
        if self.batches < 10 || self.batches > self.samples {
            return Err(Error::Config(format!(
                "batches must be in [10, samples], got {}",
                self.batches
            )));
        }
        Ok(())
    }
}

/// Estimate and standard error, both in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

impl McEstimate {
    /// `|estimate - reference| <= k * stderr`.
    pub fn agrees_with(&self, reference: f64, k: f64) -> bool {
        (self.estimate - reference).abs() <= k * self.stderr
    }
}

/// How the source-relay information is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SrMode {
    /// Sample the relay symbol and average the conditional Gaussian rate.
    State,
    /// Also sample the source symbol and noise and average the log-likelihood ratio.
    LikelihoodRatio,
}

/// Runs `per_sample` over all samples and reduces batch means in order.
fn run_batches(
    cfg: &McConfig,
    per_sample: impl Fn(&mut ChaCha8Rng) -> f64 + Sync,
) -> Result<McEstimate> {
    cfg.validate()?;
    let b = cfg.batches;
    let base = cfg.samples / b;
    let extra = cfg.samples % b;
    let means: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let n = base + usize::from(k < extra);
            let mut acc = 0.0;
            for _ in 0..n {
                acc += per_sample(&mut rng);
            }
            acc / n as f64
        })
        .collect();
    let mean = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (b - 1) as f64;
    Ok(McEstimate {
        estimate: mean,
        stderr: (var / b as f64).sqrt(),
    })
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn sample_mixture(rng: &mut ChaCha8Rng, comps: &[(f64, f64, f64)]) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(w, mu, sd) in comps {
        acc += w;
        if u < acc {
            return mu + sd * normal(rng);
        }
    }
    let &(_, mu, sd) = comps.last().expect("non-empty mixture");
    mu + sd * normal(rng)
}

/// Differential entropy `-E[log2 p(Y)]` by sampling from the mixture.
pub fn mc_entropy<T: Real>(m: &GaussianMixture<T>, cfg: &McConfig) -> Result<McEstimate> {
    let comps: Vec<(f64, f64, f64)> = m
        .components()
        .iter()
        .map(|c| {
            (
                c.weight.to_f64_lossy(),
                c.mean.to_f64_lossy(),
                c.variance.to_f64_lossy().sqrt(),
            )
        })
        .collect();
    let m64 = GaussianMixture::<f64>::new(
        m.components()
            .iter()
            .map(|c| crate::numerics::MixtureComponent {
                weight: c.weight.to_f64_lossy(),
                mean: c.mean.to_f64_lossy(),
                variance: c.variance.to_f64_lossy(),
            })
            .collect(),
    )?;
    let log2e = std::f64::consts::LOG2_E;
    run_batches(cfg, |rng| {
        -m64.ln_density(sample_mixture(rng, &comps)) * log2e
    })
}

/// Relay symbol sampler for any input distribution.
fn relay_sampler<T: Real>(
    dist: &RelayInputDistribution<T>,
) -> impl Fn(&mut ChaCha8Rng) -> f64 + Sync {
    enum S {
        Atoms(Vec<(f64, f64)>),
        Gauss(f64),
        Bg(f64, f64),
    }
    let s = match dist {
        RelayInputDistribution::Discrete { points } => {
            let mut cum = 0.0;
            S::Atoms(
                points
                    .atoms()
                    .into_iter()
                    .map(|(x, p)| {
                        cum += p.to_f64_lossy();
                        (cum, x.to_f64_lossy())
                    })
                    .collect(),
            )
        }
        RelayInputDistribution::Gaussian { variance } => S::Gauss(variance.to_f64_lossy().sqrt()),
        RelayInputDistribution::BernoulliGaussian { q, p_r_used } => {
            let q = q.to_f64_lossy();
            S::Bg(q, (p_r_used.to_f64_lossy() / q).sqrt())
        }
    };
    move |rng: &mut ChaCha8Rng| match &s {
        S::Atoms(a) => {
            let u: f64 = rng.random::<f64>() * a.last().map_or(1.0, |l| l.0);
            a.iter()
                .find(|(c, _)| u < *c)
                .or(a.last())
                .map_or(0.0, |&(_, x)| x)
        }
        S::Gauss(sd) => sd * normal(rng),
        S::Bg(q, sd) => {
            if rng.random::<f64>() < *q {
                sd * normal(rng)
            } else {
                0.0
            }
        }
    }
}

/// Source-relay information `I(X_S; Y_R | X_R)` of the threshold policy.
pub fn mc_mi_source_relay<T: Real>(
    dist: &RelayInputDistribution<T>,
    policy: &SourcePolicy<T>,
    sigma_r_sq: T,
    mode: SrMode,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let relay = relay_sampler(dist);
    let policy = SourcePolicy {
        x_th: policy.x_th.to_f64_lossy(),
        alpha: policy.alpha.to_f64_lossy(),
        p_s: policy.p_s.to_f64_lossy(),
    };
    let sr = sigma_r_sq.to_f64_lossy();
    run_batches(cfg, |rng| {
        let x = relay(rng);
        let p = source_power(x, &policy);
        let noise = sr + policy.alpha * x * x;
        match mode {
            SrMode::State => 0.5 * (p / noise).ln_1p() * std::f64::consts::LOG2_E,
            SrMode::LikelihoodRatio => {
                if p == 0.0 {
                    return 0.0;
                }
                let xs = p.sqrt() * normal(rng);
                let y = xs + noise.sqrt() * normal(rng);
                let cond = -(y - xs) * (y - xs) / (2.0 * noise) - 0.5 * noise.ln();
                let marg = -y * y / (2.0 * (noise + p)) - 0.5 * (noise + p).ln();
                (cond - marg) * std::f64::consts::LOG2_E
            }
        }
    })
}
