//! Descriptive moments, the Jarque-Bera normality test, and the shared
//! [`TestResult`] record.

pub mod dist;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use dist::{chi2_sf, normal_cdf, normal_icdf, normal_sf};

/// Conventional significance level used for every reject flag.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    /// Sample standard deviation (divisor n - 1).
    pub std_dev: f64,
    /// `m3 / m2^{3/2}` with population central moments.
    pub skewness: f64,
    /// Raw kurtosis `m4 / m2²`; a normal distribution gives 3.
    pub kurtosis: f64,
}

/// Outcome of one hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test_name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub reject_at_5pct: bool,
    /// How the result relates to the printed conventions it mirrors.
    pub mode_notes: String,
    pub auxiliary: BTreeMap<String, f64>,
}

impl TestResult {
    pub fn new(test_name: impl Into<String>, statistic: f64, p_value: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            test_name: test_name.into(),
            statistic,
            p_value,
            reject_at_5pct: p_value < ALPHA,
            mode_notes: String::new(),
            auxiliary: BTreeMap::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.mode_notes = note.into();
        self
    }

    pub fn with_aux(mut self, key: &str, value: f64) -> Self {
        self.auxiliary.insert(key.to_string(), value);
        self
    }
}

pub fn describe(values: &[f64]) -> Result<DescriptiveStats> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "descriptive statistics".into(),
            needed: 2,
            got: n,
        });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for &x in values {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        max = max.max(x);
        min = min.min(x);
    }
    if m2 == 0.0 || values.iter().all(|&x| x == values[0]) {
        return Err(Error::ZeroVariance("skewness and kurtosis are undefined for a constant series".into()));
    }
    let std_dev = (m2 / (nf - 1.0)).sqrt();
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    Ok(DescriptiveStats {
        n,
        mean,
        max,
        min,
        std_dev,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

/// `JB = n (S²/6 + (K - 3)²/24)`, referred to chi-square with 2 df.
pub fn jarque_bera(stats: &DescriptiveStats) -> TestResult {
    let n = stats.n as f64;
    let excess = stats.kurtosis - 3.0;
    let jb = n * (stats.skewness * stats.skewness / 6.0 + excess * excess / 24.0);
    TestResult::new("Jarque-Bera", jb, chi2_sf(jb, 2))
        .with_aux("skewness", stats.skewness)
        .with_aux("kurtosis", stats.kurtosis)
        .with_aux("n", n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate, GeneratorKind, GeneratorSpec};
    use proptest::prelude::*;

    fn stats(n: usize, skewness: f64, kurtosis: f64) -> DescriptiveStats {
        DescriptiveStats {
            n,
            mean: 0.0,
            max: 1.0,
            min: -1.0,
            std_dev: 1.0,
            skewness,
            kurtosis,
        }
    }

    #[test]
    fn describe_symmetric_triplet() {
        let s = describe(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.skewness, 0.0);
        assert!((s.kurtosis - 1.5).abs() < 1e-15);
        assert!((s.std_dev - 1.0).abs() < 1e-15);
        assert_eq!((s.min, s.max), (-1.0, 1.0));
    }

    #[test]
    fn describe_errors() {
        assert!(matches!(describe(&[0.3; 10]), Err(Error::ZeroVariance(_))));
        assert!(matches!(describe(&[1.0]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn jb_examples() {
        let r = jarque_bera(&stats(100, 0.0, 3.0));
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject_at_5pct);

        let r = jarque_bera(&stats(100, 0.5, 4.0));
        assert!((r.statistic - 100.0 * (0.25 / 6.0 + 1.0 / 24.0)).abs() < 1e-12);
        assert!((r.statistic - 8.3333).abs() < 1e-4);

        let r = jarque_bera(&stats(5153, -0.1836, 7.9450));
        assert!((r.statistic - 5279.1).abs() <= 0.5, "{}", r.statistic);
        assert!(r.reject_at_5pct);
    }

    #[test]
    fn jb_size_on_gaussian_samples() {
        let trials = 2000;
        let mut rejections = 0;
        for t in 0..trials {
            let spec = GeneratorSpec::iid_gaussian(500, 1.0, 10_000 + t);
            let x = generate(&spec).unwrap();
            if jarque_bera(&describe(&x).unwrap()).reject_at_5pct {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / trials as f64;
        assert!((0.03..=0.08).contains(&rate), "rate {rate}");
    }

    #[test]
    fn jb_zero_only_for_normal_moments() {
        assert!(jarque_bera(&stats(50, 0.01, 3.0)).statistic > 0.0);
        assert!(jarque_bera(&stats(50, 0.0, 2.99)).statistic > 0.0);
    }

    proptest! {
        #[test]
        fn jb_nonnegative(n in 2usize..10_000, s in -5.0f64..5.0, k in 1.0f64..30.0) {
            prop_assert!(jarque_bera(&stats(n, s, k)).statistic >= 0.0);
        }

        #[test]
        fn describe_affine_behaviour(seed in 0u64..1000, c in -10.0f64..10.0, a in 0.01f64..100.0) {
            let x = generate(&GeneratorSpec::new(GeneratorKind::IidGaussian, 60, 0.0, 0.0, 1.0, seed)).unwrap();
            let base = describe(&x).unwrap();
            prop_assert!(base.min <= base.mean && base.mean <= base.max);

            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let s = describe(&shifted).unwrap();
            prop_assert!((s.mean - (base.mean + c)).abs() < 1e-12);
            prop_assert!((s.std_dev - base.std_dev).abs() < 1e-12);
            prop_assert!((s.skewness - base.skewness).abs() < 1e-12);
            prop_assert!((s.kurtosis - base.kurtosis).abs() < 1e-12);

            let scaled: Vec<f64> = x.iter().map(|v| v * a).collect();
            let s = describe(&scaled).unwrap();
            prop_assert!((s.mean - base.mean * a).abs() < 1e-12 * a);
            prop_assert!((s.std_dev - base.std_dev * a).abs() < 1e-12 * a);
            prop_assert!((s.min - base.min * a).abs() < 1e-12 * a);
            prop_assert!((s.max - base.max * a).abs() < 1e-12 * a);
            prop_assert!((s.skewness - base.skewness).abs() < 1e-12);
            prop_assert!((s.kurtosis - base.kurtosis).abs() < 1e-12);
        }
    }
}
