//! Seeded synthetic series and a Monte-Carlo size/power harness.
//!
//! Reproducibility contract: uniforms come from ChaCha8 (`rand_chacha`),
//! seeded through `SeedableRng::seed_from_u64`; each 64-bit output `u` maps
//! to `((u >> 11) + 0.5) · 2⁻⁵³` in (0, 1), and normals are obtained by the
//! inverse-CDF method through [`normal_icdf`]. Per-trial seeds are
//! `splitmix64(seed + trial · 0x9E3779B97F4A7C15)`.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randomness::{acf, ljung_box, runs_test_values, AcfMode, RunsReference};
use crate::stats::{describe, jarque_bera, normal_icdf};
use crate::unitroot::{adf_test, default_lag, AdfModel, AdfTarget};

/// Draws discarded before an AR(1) path is emitted.
pub const AR1_BURN_IN: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    RandomWalk,
    Ar1,
    IidGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub drift: f64,
    pub phi: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, drift: f64, phi: f64, sigma: f64, seed: u64) -> Self {
        GeneratorSpec {
            kind,
            n,
            drift,
            phi,
            sigma,
            seed,
        }
    }

    pub fn iid_gaussian(n: usize, sigma: f64, seed: u64) -> Self {
        Self::new(GeneratorKind::IidGaussian, n, 0.0, 0.0, sigma, seed)
    }

    pub fn random_walk(n: usize, drift: f64, sigma: f64, seed: u64) -> Self {
        Self::new(GeneratorKind::RandomWalk, n, drift, 0.0, sigma, seed)
    }

    pub fn ar1(n: usize, phi: f64, sigma: f64, seed: u64) -> Self {
        Self::new(GeneratorKind::Ar1, n, 0.0, phi, sigma, seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GeneratorSpec { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::Config(format!("generator length {} is below 10", self.n)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("generator sigma {} must be positive", self.sigma)));
        }
        if !self.drift.is_finite() {
            return Err(Error::Config("generator drift must be finite".into()));
        }
        if self.kind == GeneratorKind::Ar1 && !(self.phi.abs() < 1.0) {
            return Err(Error::Config(format!("AR(1) coefficient {} must satisfy |phi| < 1", self.phi)));
        }
        Ok(())
    }
}

/// Standard normal stream over ChaCha8.
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        NormalStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform on the open interval (0, 1).
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        normal_icdf(self.next_uniform()).expect("uniform lies strictly inside (0, 1)")
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn trial_seed(base: u64, trial: u64) -> u64 {
    splitmix64(base.wrapping_add(trial.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Random walk levels start at `X_0 = 0` (the first emitted value).
pub fn generate(spec: &GeneratorSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut normals = NormalStream::new(spec.seed);
    let mut out = Vec::with_capacity(spec.n);
    match spec.kind {
        GeneratorKind::IidGaussian => {
            out.extend((0..spec.n).map(|_| spec.sigma * normals.next_normal()));
        }
        GeneratorKind::RandomWalk => {
            let mut level = 0.0;
            out.push(level);
            for _ in 1..spec.n {
                level += spec.drift + spec.sigma * normals.next_normal();
                out.push(level);
            }
        }
        GeneratorKind::Ar1 => {
            let mut y = 0.0;
            for _ in 0..AR1_BURN_IN {
                y = spec.phi * y + spec.sigma * normals.next_normal();
            }
            for _ in 0..spec.n {
                y = spec.phi * y + spec.sigma * normals.next_normal();
                out.push(y);
            }
        }
    }
    Ok(out)
}

/// A test the harness can run on each simulated draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    RunsMean,
    RunsZero,
    JarqueBera,
    LjungBox { horizon: usize },
    Adf { model: AdfModel, lags: Option<usize> },
}

impl TestKind {
    /// p-value of the test on one sample.
    pub fn p_value(&self, x: &[f64]) -> Result<f64> {
        Ok(match *self {
            TestKind::RunsMean => runs_test_values(x, RunsReference::Mean)?.p_value,
            TestKind::RunsZero => runs_test_values(x, RunsReference::Zero)?.p_value,
            TestKind::JarqueBera => jarque_bera(&describe(x)?).p_value,
            TestKind::LjungBox { horizon } => {
                let a = acf(x, horizon, AcfMode::Appendix)?;
                ljung_box(&a, x.len(), horizon)?.p_value
            }
            TestKind::Adf { model, lags } => {
                let q = lags.unwrap_or_else(|| default_lag(x.len()));
                adf_test(x, q, model, AdfTarget::Returns)?.p_value
            }
        })
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestKind::RunsMean => f.write_str("runs_mean"),
            TestKind::RunsZero => f.write_str("runs_zero"),
            TestKind::JarqueBera => f.write_str("jarque_bera"),
            TestKind::LjungBox { horizon } => write!(f, "ljung_box:{horizon}"),
            TestKind::Adf { model, lags: None } => write!(f, "adf:{model}"),
            TestKind::Adf { model, lags: Some(q) } => write!(f, "adf:{model}:{q}"),
        }
    }
}

impl FromStr for TestKind {
    type Err = Error;

    /// `runs_mean`, `runs_zero`, `jarque_bera`, `ljung_box[:h]`,
    /// `adf[:model[:lags]]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let rest: Vec<&str> = parts.collect();
        let bad = || Error::Config(format!("unknown test identifier '{s}'"));
        let kind = match (name.as_str(), rest.as_slice()) {
            ("runs" | "runs_mean", []) => TestKind::RunsMean,
            ("runs_zero", []) => TestKind::RunsZero,
            ("jb" | "jarque_bera", []) => TestKind::JarqueBera,
            ("ljung_box", []) => TestKind::LjungBox { horizon: 20 },
            ("ljung_box", [h]) => TestKind::LjungBox {
                horizon: h.parse().map_err(|_| bad())?,
            },
            ("adf", []) => TestKind::Adf {
                model: AdfModel::DriftTrend,
                lags: None,
            },
            ("adf", [m]) => TestKind::Adf {
                model: m.parse()?,
                lags: None,
            },
            ("adf", [m, q]) => TestKind::Adf {
                model: m.parse()?,
                lags: Some(q.parse().map_err(|_| bad())?),
            },
            _ => return Err(bad()),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizePowerResult {
    pub test_name: String,
    pub generator: GeneratorSpec,
    pub trials: usize,
    pub alpha: f64,
    pub rejection_rate: f64,
    /// `1.96 · √(r(1 - r)/trials)`.
    pub ci_halfwidth: f64,
    /// Draws on which the test itself errored; counted as non-rejections.
    pub failed_trials: usize,
}

pub fn ci_halfwidth(rate: f64, trials: usize) -> f64 {
    1.96 * (rate * (1.0 - rate) / trials as f64).sqrt()
}

/// Runs `test` on `trials` independent draws of `spec`. Trials run in
/// parallel but are tallied by trial index, so the result does not depend on
/// scheduling.
pub fn size_power(test: TestKind, spec: &GeneratorSpec, trials: usize, alpha: f64) -> Result<SizePowerResult> {
    if trials < 100 {
        return Err(Error::Config(format!("size/power needs at least 100 trials, got {trials}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha {alpha} outside (0, 1)")));
    }
    spec.validate()?;
    let outcomes: Vec<Option<bool>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let draw = generate(&spec.with_seed(trial_seed(spec.seed, t))).ok()?;
            test.p_value(&draw).ok().map(|p| p < alpha)
        })
        .collect();
    let rejections = outcomes.iter().filter(|o| **o == Some(true)).count();
    let failed_trials = outcomes.iter().filter(|o| o.is_none()).count();
    let rate = rejections as f64 / trials as f64;
    Ok(SizePowerResult {
        test_name: test.to_string(),
        generator: spec.clone(),
        trials,
        alpha,
        rejection_rate: rate,
        ci_halfwidth: ci_halfwidth(rate, trials),
        failed_trials,
    })
}

/// One Monte-Carlo calibration check with its acceptance band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryCheck {
    pub label: String,
    pub result: SizePowerResult,
    pub lower: f64,
    pub upper: f64,
}

impl BatteryCheck {
    pub fn passed(&self) -> bool {
        (self.lower..=self.upper).contains(&self.result.rejection_rate)
    }
}

/// Size checks on i.i.d. Gaussian draws and random-walk levels, plus the
/// Ljung-Box power check against AR(1) with φ = 0.3.
pub fn validation_battery(seed: u64) -> Result<Vec<BatteryCheck>> {
    let iid = GeneratorSpec::iid_gaussian(500, 1.0, seed);
    let plan: [(&str, TestKind, GeneratorSpec, usize, f64, f64); 5] = [
        ("runs test size", TestKind::RunsMean, iid.clone(), 2000, 0.03, 0.07),
        ("Jarque-Bera size", TestKind::JarqueBera, iid.with_seed(splitmix64(seed ^ 1)), 2000, 0.03, 0.08),
        (
            "Ljung-Box(10) size",
            TestKind::LjungBox { horizon: 10 },
            iid.with_seed(splitmix64(seed ^ 2)),
            2000,
            0.03,
            0.08,
        ),
        (
            "ADF(drift) size on random-walk levels",
            TestKind::Adf {
                model: AdfModel::Drift,
                lags: None,
            },
            GeneratorSpec::random_walk(1000, 0.0, 1.0, splitmix64(seed ^ 3)),
            1000,
            0.0,
            0.10,
        ),
        (
            "Ljung-Box(10) power against AR(1) phi=0.3",
            TestKind::LjungBox { horizon: 10 },
            GeneratorSpec::ar1(500, 0.3, 1.0, splitmix64(seed ^ 4)),
            1000,
            0.95,
            1.0,
        ),
    ];
    plan.into_iter()
        .map(|(label, test, spec, trials, lower, upper)| {
            Ok(BatteryCheck {
                label: label.to_string(),
                result: size_power(test, &spec, trials, 0.05)?,
                lower,
                upper,
            })
        })
        .collect()
}

/// Fraction of `trials` i.i.d. Gaussian samples of length `n` whose ADF tau
/// (drift-and-trend model, default lags) falls below `threshold`.
pub fn adf_tau_below(n: usize, trials: usize, threshold: f64, seed: u64) -> Result<f64> {
    let spec = GeneratorSpec::iid_gaussian(n, 1.0, seed);
    spec.validate()?;
    let hits: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            generate(&spec.with_seed(trial_seed(seed, t)))
                .and_then(|x| adf_test(&x, default_lag(x.len()), AdfModel::DriftTrend, AdfTarget::Returns))
                .map(|r| r.tau < threshold)
                .unwrap_or(false)
        })
        .collect();
    Ok(hits.iter().filter(|h| **h).count() as f64 / trials.max(1) as f64)
}
