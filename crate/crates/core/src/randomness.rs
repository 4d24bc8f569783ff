//! Runs test, sample autocorrelation with t-values, and the Ljung-Box
//! portmanteau test.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::ReturnSeries;
use crate::stats::{chi2_sf, normal_sf, TestResult};

/// Two-sided 5% normal critical value.
pub const Z_CRIT_5PCT: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunsReference {
    Mean,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunsResult {
    pub n: usize,
    pub n_runs: usize,
    pub n_above: usize,
    pub n_below: usize,
    /// Values equal to the reference; excluded from the run sequence.
    pub n_equal: usize,
    /// Signed statistic `(U - μ_U) / σ_U`.
    pub z: f64,
    pub p_value: f64,
    pub reference: RunsReference,
    pub reference_value: f64,
}

impl RunsResult {
    pub fn reject_at_5pct(&self) -> bool {
        self.z.abs() > Z_CRIT_5PCT
    }

    pub fn to_test_result(&self) -> TestResult {
        let name = match self.reference {
            RunsReference::Mean => "Runs (mean)",
            RunsReference::Zero => "Runs (zero)",
        };
        let mut r = TestResult::new(name, self.z, self.p_value)
            .with_note("signed Z; printed tables show |Z|")
            .with_aux("n_runs", self.n_runs as f64)
            .with_aux("n_above", self.n_above as f64)
            .with_aux("n_below", self.n_below as f64)
            .with_aux("n_equal", self.n_equal as f64);
        r.reject_at_5pct = self.reject_at_5pct();
        r
    }
}

/// Z and two-sided p from run counts, with `n = n_above + n_below`.
pub fn runs_z(n_above: usize, n_below: usize, n_runs: usize) -> Result<(f64, f64)> {
    if n_above == 0 || n_below == 0 {
        return Err(Error::DegenerateClassification(format!(
            "runs test needs values on both sides of the reference (above {n_above}, below {n_below})"
        )));
    }
    let (a, b) = (n_above as f64, n_below as f64);
    let n = a + b;
    let two_ab = 2.0 * a * b;
    let mu = two_ab / n + 1.0;
    let var = two_ab * (two_ab - n) / (n * n * (n - 1.0));
    if !(var > 0.0) {
        return Err(Error::DegenerateClassification(format!(
            "runs variance vanishes for {n_above} above / {n_below} below"
        )));
    }
    let z = (n_runs as f64 - mu) / var.sqrt();
    Ok((z, (2.0 * normal_sf(z.abs())).min(1.0)))
}

pub fn runs_test_values(values: &[f64], reference: RunsReference) -> Result<RunsResult> {
    let v = match reference {
        RunsReference::Mean => {
            if values.is_empty() {
                return Err(Error::InsufficientData {
                    what: "runs test".into(),
                    needed: 2,
                    got: 0,
                });
            }
            values.iter().sum::<f64>() / values.len() as f64
        }
        RunsReference::Zero => 0.0,
    };
    let (mut above, mut below, mut equal, mut runs) = (0, 0, 0, 0);
    let mut last: Option<bool> = None;
    for &x in values {
        let side = if x > v {
            above += 1;
            true
        } else if x < v {
            below += 1;
            false
        } else {
            equal += 1;
            continue;
        };
        if last != Some(side) {
            runs += 1;
            last = Some(side);
        }
    }
    let (z, p_value) = runs_z(above, below, runs)?;
    Ok(RunsResult {
        n: values.len(),
        n_runs: runs,
        n_above: above,
        n_below: below,
        n_equal: equal,
        z,
        p_value,
        reference,
        reference_value: v,
    })
}

pub fn runs_test(returns: &ReturnSeries, reference: RunsReference) -> Result<RunsResult> {
    runs_test_values(returns.returns(), reference)
}

/// Which standard error the reported t-values use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcfMode {
    /// `se = 1/√n`.
    Appendix,
    /// `se = sd(ρ₁..ρ_K)/√K`, as in the printed serial-correlation tables.
    PaperTable,
}

impl fmt::Display for AcfMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AcfMode::Appendix => "appendix",
            AcfMode::PaperTable => "paper_table",
        })
    }
}

impl FromStr for AcfMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "appendix" => Ok(AcfMode::Appendix),
            "paper_table" | "table" => Ok(AcfMode::PaperTable),
            other => Err(Error::Config(format!("unknown ACF mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    pub n: usize,
    pub lags: Vec<usize>,
    pub rho: Vec<f64>,
    pub se_appendix: f64,
    /// Sample standard deviation (divisor K - 1) of the ρ values.
    pub sd_rho: Option<f64>,
    /// `None` when fewer than two lags or all ρ equal.
    pub se_paper_table: Option<f64>,
    pub t_appendix: Vec<f64>,
    pub t_paper_table: Option<Vec<f64>>,
    pub mode: AcfMode,
    /// Ljung-Box Q over every computed lag.
    pub ljung_box_q: f64,
    pub q_p_value: f64,
}

impl AcfResult {
    /// Derives standard errors, t-values and Q from given coefficients.
    pub fn from_rho(rho: Vec<f64>, n: usize, mode: AcfMode) -> Result<Self> {
        let k = rho.len();
        if k == 0 || n <= k {
            return Err(Error::InsufficientData {
                what: "autocorrelation".into(),
                needed: k + 1,
                got: n,
            });
        }
        let se_appendix = 1.0 / (n as f64).sqrt();
        let sd_rho = if k >= 2 {
            let mean = rho.iter().sum::<f64>() / k as f64;
            Some((rho.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k as f64 - 1.0)).sqrt())
        } else {
            None
        };
        let se_paper_table = sd_rho.filter(|s| *s > 0.0).map(|s| s / (k as f64).sqrt());
        let t_appendix = rho.iter().map(|r| r / se_appendix).collect();
        let t_paper_table = se_paper_table.map(|se| rho.iter().map(|r| r / se).collect());
        let q = ljung_box_q(&rho, n, k);
        Ok(AcfResult {
            n,
            lags: (1..=k).collect(),
            rho,
            se_appendix,
            sd_rho,
            se_paper_table,
            t_appendix,
            t_paper_table,
            mode,
            ljung_box_q: q,
            q_p_value: chi2_sf(q, k as u32),
        })
    }

    pub fn max_lag(&self) -> usize {
        self.rho.len()
    }

    /// Standard error of the selected mode.
    pub fn se(&self) -> Option<f64> {
        match self.mode {
            AcfMode::Appendix => Some(self.se_appendix),
            AcfMode::PaperTable => self.se_paper_table,
        }
    }

    /// t-values of the selected mode.
    pub fn t_values(&self) -> Option<&[f64]> {
        match self.mode {
            AcfMode::Appendix => Some(&self.t_appendix),
            AcfMode::PaperTable => self.t_paper_table.as_deref(),
        }
    }

    /// Lags whose selected-mode |t| exceeds 1.96.
    pub fn significant_lags(&self) -> Vec<usize> {
        self.t_values()
            .map(|t| {
                t.iter()
                    .zip(&self.lags)
                    .filter(|(t, _)| t.abs() > Z_CRIT_5PCT)
                    .map(|(_, l)| *l)
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// `ρ_k = Σ_{t>k} (y_t - ȳ)(y_{t-k} - ȳ) / Σ (y_t - ȳ)²` for k = 1..=max_lag.
pub fn acf(values: &[f64], max_lag: usize, mode: AcfMode) -> Result<AcfResult> {
    let n = values.len();
    if max_lag == 0 || n <= max_lag {
        return Err(Error::InsufficientData {
            what: format!("autocorrelation to lag {max_lag}"),
            needed: max_lag + 1,
            got: n,
        });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if denom == 0.0 || values.iter().all(|&v| v == values[0]) {
        return Err(Error::ZeroVariance("autocorrelation of a constant series".into()));
    }
    let rho0 = dev.iter().map(|d| d * d).sum::<f64>() / denom;
    debug_assert!((rho0 - 1.0).abs() < 1e-12);
    let rho = (1..=max_lag)
        .map(|k| dev[k..].iter().zip(&dev[..n - k]).map(|(a, b)| a * b).sum::<f64>() / denom)
        .collect();
    AcfResult::from_rho(rho, n, mode)
}

fn ljung_box_q(rho: &[f64], n: usize, h: usize) -> f64 {
    let nf = n as f64;
    nf * (nf + 2.0)
        * rho[..h]
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (nf - (i + 1) as f64))
            .sum::<f64>()
}

/// `Q = n(n+2) Σ_{k≤h} ρ_k² / (n - k)`, chi-square with h df.
pub fn ljung_box(acf_result: &AcfResult, n: usize, h: usize) -> Result<TestResult> {
    let k = acf_result.max_lag();
    if h == 0 || h > k || k >= n {
        return Err(Error::InvalidInput(format!(
            "Ljung-Box horizon {h} must satisfy 1 <= h <= {k} < n = {n}"
        )));
    }
    let q = ljung_box_q(&acf_result.rho, n, h);
    Ok(TestResult::new("Ljung-Box", q, chi2_sf(q, h as u32)).with_aux("horizon", h as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate, GeneratorSpec};
    use proptest::prelude::*;

    /// Direct double loop over (t, k), independent of the slice-zip path.
    fn acf_oracle(y: &[f64], k_max: usize) -> Vec<f64> {
        let n = y.len();
        let mean = y.iter().sum::<f64>() / n as f64;
        let mut den = 0.0;
        for v in y {
            den += (v - mean) * (v - mean);
        }
        let mut out = vec![0.0; k_max];
        for k in 1..=k_max {
            let mut num = 0.0;
            for t in k..n {
                num += (y[t] - mean) * (y[t - k] - mean);
            }
            out[k - 1] = num / den;
        }
        out
    }

    #[test]
    fn alternating_runs() {
        let x: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = runs_test_values(&x, RunsReference::Zero).unwrap();
        assert_eq!((r.n_runs, r.n_above, r.n_below), (20, 10, 10));
        let sigma = (10.0 * 18.0 / (20.0 * 19.0) * 10.0_f64).sqrt();
        let expect = (20.0 - 11.0) / sigma;
        assert!((r.z - expect).abs() < 1e-12);
        assert!((r.z - 4.13).abs() < 0.01);
        assert!(r.reject_at_5pct());
    }

    #[test]
    fn two_blocks() {
        let x: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { -1.0 }).collect();
        let r = runs_test_values(&x, RunsReference::Zero).unwrap();
        assert_eq!(r.n_runs, 2);
        assert!(r.z < -3.5);
        assert!(r.reject_at_5pct());
    }

    #[test]
    fn printed_daily_counts() {
        let (z, p) = runs_z(2488, 2665, 2477).unwrap();
        assert!((z.abs() - 2.70).abs() <= 0.05, "z={z}");
        assert!((0.005..=0.009).contains(&p), "p={p}");
    }

    #[test]
    fn equal_values_excluded() {
        let x = [1.0, 0.0, 1.0, -1.0, 0.0, -1.0, 1.0];
        let r = runs_test_values(&x, RunsReference::Zero).unwrap();
        assert_eq!(r.n_equal, 2);
        assert_eq!(r.n_above + r.n_below + r.n_equal, r.n);
        // sequence without zeros: + + - - + => 3 runs
        assert_eq!(r.n_runs, 3);
    }

    #[test]
    fn one_sided_is_degenerate() {
        let err = runs_test_values(&[1.0, 2.0, 3.0], RunsReference::Zero).unwrap_err();
        assert!(matches!(err, Error::DegenerateClassification(_)));
    }

    #[test]
    fn acf_ramp() {
        let a = acf(&[1.0, 2.0, 3.0, 4.0, 5.0], 1, AcfMode::Appendix).unwrap();
        assert!((a.rho[0] - 0.4).abs() < 1e-15);
        assert!(a.se_paper_table.is_none());
        assert!(matches!(acf(&[2.0; 8], 2, AcfMode::Appendix), Err(Error::ZeroVariance(_))));
        assert!(acf(&[1.0, 2.0], 2, AcfMode::Appendix).is_err());
    }

    #[test]
    fn paper_table_t_values() {
        let mut rho = vec![0.0319, -0.0505];
        rho.extend([
            0.0576, 0.083, 0.0057, -0.0555, 0.0184, 0.0256, -0.0224, -0.0206, 0.0203, 0.0405, 0.0637, -0.0263, 0.0635,
            0.0225, -0.0055, 0.0139, -0.0484, 0.0215,
        ]);
        let a = AcfResult::from_rho(rho, 5153, AcfMode::PaperTable).unwrap();
        assert!((a.se().unwrap() - 0.008933).abs() < 1e-6);
        let t = a.t_values().unwrap();
        assert!((t[0] - 3.57).abs() < 0.01);
        assert!((t[1] + 5.65).abs() < 0.01);
    }

    #[test]
    fn ljung_box_examples() {
        let zero = AcfResult::from_rho(vec![0.0; 5], 100, AcfMode::Appendix).unwrap();
        let r = ljung_box(&zero, 100, 5).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);

        let one = AcfResult::from_rho(vec![0.1], 400, AcfMode::Appendix).unwrap();
        let r = ljung_box(&one, 400, 1).unwrap();
        assert!((r.statistic - 400.0 * 402.0 * 0.01 / 399.0).abs() < 1e-12);
        assert!((r.statistic - 4.030).abs() < 1e-3);
        assert!((r.p_value - 0.0447).abs() < 1e-4, "{}", r.p_value);
        assert!(r.reject_at_5pct);

        assert!(ljung_box(&one, 400, 2).is_err());
    }

    #[test]
    fn ljung_box_mean_under_null() {
        let trials = 2000;
        let mut total = 0.0;
        for t in 0..trials {
            let x = generate(&GeneratorSpec::iid_gaussian(10_000, 1.0, 500 + t)).unwrap();
            let a = acf(&x, 20, AcfMode::Appendix).unwrap();
            total += ljung_box(&a, x.len(), 20).unwrap().statistic;
        }
        let mean = total / trials as f64;
        assert!((18.5..=21.5).contains(&mean), "mean Q {mean}");
    }

    #[test]
    fn white_noise_rho_small() {
        let trials = 300;
        let mut ok = 0;
        for t in 0..trials {
            let x = generate(&GeneratorSpec::iid_gaussian(10_000, 1.0, 90_000 + t)).unwrap();
            let a = acf(&x, 20, AcfMode::Appendix).unwrap();
            if a.rho.iter().all(|r| r.abs() < 0.05) {
                ok += 1;
            }
        }
        assert!(ok as f64 / trials as f64 >= 0.99);
    }

    #[test]
    fn size_on_gaussian_samples() {
        let trials = 2000u64;
        let (mut runs_rej, mut lb_rej) = (0, 0);
        for t in 0..trials {
            let x = generate(&GeneratorSpec::iid_gaussian(500, 1.0, 31_000 + t)).unwrap();
            if runs_test_values(&x, RunsReference::Mean).unwrap().p_value < 0.05 {
                runs_rej += 1;
            }
            let a = acf(&x, 10, AcfMode::Appendix).unwrap();
            if ljung_box(&a, 500, 10).unwrap().reject_at_5pct {
                lb_rej += 1;
            }
        }
        let runs_rate = runs_rej as f64 / trials as f64;
        let lb_rate = lb_rej as f64 / trials as f64;
        assert!((0.03..=0.07).contains(&runs_rate), "runs {runs_rate}");
        assert!((0.03..=0.08).contains(&lb_rate), "lb {lb_rate}");
    }

    proptest! {
        #[test]
        fn acf_matches_double_loop(seed in 0u64..10_000, n in 30usize..600) {
            let y = generate(&GeneratorSpec::iid_gaussian(n, 1.0, seed)).unwrap();
            let a = acf(&y, 20, AcfMode::Appendix).unwrap();
            for (got, want) in a.rho.iter().zip(acf_oracle(&y, 20)) {
                prop_assert!((got - want).abs() < 1e-12);
                prop_assert!(got.abs() <= 1.0);
            }
        }

        #[test]
        fn acf_time_reversal(seed in 0u64..10_000, n in 30usize..400) {
            let y = generate(&GeneratorSpec::ar1(n, 0.4, 1.0, seed)).unwrap();
            let rev: Vec<f64> = y.iter().rev().copied().collect();
            let a = acf(&y, 10, AcfMode::Appendix).unwrap();
            let b = acf(&rev, 10, AcfMode::Appendix).unwrap();
            for (x, z) in a.rho.iter().zip(&b.rho) {
                prop_assert!((x - z).abs() < 1e-12);
            }
        }

        #[test]
        fn runs_zero_reference_monotone_invariance(seed in 0u64..10_000) {
            let y = generate(&GeneratorSpec::iid_gaussian(200, 1.0, seed)).unwrap();
            let base = runs_test_values(&y, RunsReference::Zero).unwrap();
            for f in [|v: f64| 2.0 * v, |v: f64| v * v * v] {
                let t: Vec<f64> = y.iter().map(|v| f(*v)).collect();
                let r = runs_test_values(&t, RunsReference::Zero).unwrap();
                prop_assert_eq!(&r, &RunsResult { reference_value: 0.0, ..base.clone() });
            }
            prop_assert!(base.n_runs <= base.n_above + base.n_below);
            prop_assert!((0.0..=1.0).contains(&base.p_value));
        }
    }
}
