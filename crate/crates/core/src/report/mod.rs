//! End-to-end analysis: ingest, per-period test battery, cross-market block,
//! and rendering of the resulting tables and plots.

pub mod config;
pub mod fixture;
pub mod plots;
pub mod render;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cross::{align, pearson};
use crate::error::{Error, Result};
use crate::hp::hp_filter;
use crate::ingest::{parse_price_csv, IngestReport};
use crate::randomness::{acf, ljung_box, runs_test, AcfMode, AcfResult, RunsReference, RunsResult};
use crate::series::{compute_returns, segment, PeriodScheme, PriceSeries, ReturnSeries, TradingDate};
use crate::sim::{validation_battery, BatteryCheck};
use crate::stats::{describe, jarque_bera, DescriptiveStats, TestResult};
use crate::unitroot::{adf_test, default_lag, AdfModel, AdfResult, AdfTarget};

pub use config::{AnalysisConfig, InputSpec, OutputFormat};
pub use plots::{emit_plots, normal_probability_points};
pub use render::{render, write_outputs};

/// Settings that shape the tables, echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub acf_mode: AcfMode,
    pub acf_lags: usize,
    pub ljung_box_horizon: usize,
    pub adf_model: AdfModel,
    pub adf_target: AdfTarget,
    pub adf_lags: Option<usize>,
    pub hp_lambda: f64,
}

impl ReportSettings {
    pub fn from_config(cfg: &AnalysisConfig) -> Self {
        ReportSettings {
            acf_mode: cfg.acf_mode,
            acf_lags: cfg.acf_lags,
            ljung_box_horizon: cfg.ljung_box_horizon,
            adf_model: cfg.adf_model,
            adf_target: cfg.adf_target,
            adf_lags: cfg.adf_lags,
            hp_lambda: cfg.hp_lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpSummary {
    pub lambda: f64,
    pub n: usize,
    pub objective_value: f64,
    pub trend_std: f64,
    pub cycle_std: f64,
    pub trend_min: f64,
    pub trend_max: f64,
}

/// One column of the per-market tables. A `None` cell has a matching entry
/// in [`Report::warnings`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub label: String,
    pub start: TradingDate,
    pub end: TradingDate,
    pub observations: usize,
    pub first_date: Option<TradingDate>,
    pub last_date: Option<TradingDate>,
    pub descriptive: Option<DescriptiveStats>,
    pub jarque_bera: Option<TestResult>,
    pub runs_mean: Option<RunsResult>,
    pub runs_zero: Option<RunsResult>,
    pub acf: Option<AcfResult>,
    pub ljung_box: Option<TestResult>,
    pub adf: Option<AdfResult>,
    pub hp: Option<HpSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketReport {
    pub index_name: String,
    pub ingest: IngestReport,
    pub periods: Vec<PeriodReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossPeriod {
    pub label: String,
    pub observations: usize,
    pub price_correlation: Option<f64>,
    pub return_correlation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossReport {
    pub a_name: String,
    pub b_name: String,
    pub aligned_dates: usize,
    pub fill_count_a: usize,
    pub fill_count_b: usize,
    pub periods: Vec<CrossPeriod>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scheme: PeriodScheme,
    pub settings: ReportSettings,
    pub markets: Vec<MarketReport>,
    pub cross: Option<CrossReport>,
    pub mc_validation: Option<Vec<BatteryCheck>>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(format!("report serialization: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("report JSON: {e}")))
    }
}

/// The series a report was computed from, kept for plotting.
#[derive(Debug, Clone)]
pub struct MarketData {
    pub prices: PriceSeries,
    pub returns: ReturnSeries,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: Report,
    pub data: Vec<MarketData>,
}

fn warn<T>(warnings: &mut Vec<String>, where_: &str, what: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            warnings.push(format!("{where_}: {what} skipped: {e}"));
            None
        }
    }
}

fn std_dev(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let m = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn analyze_period(
    market: &str,
    period: &crate::series::Period,
    returns: &ReturnSeries,
    prices: &PriceSeries,
    settings: &ReportSettings,
) -> (PeriodReport, Vec<String>) {
    let mut w = Vec::new();
    let r = returns.returns();
    let mut out = PeriodReport {
        label: period.label.clone(),
        start: period.start,
        end: period.end,
        observations: r.len(),
        first_date: returns.dates().first().copied(),
        last_date: returns.dates().last().copied(),
        descriptive: None,
        jarque_bera: None,
        runs_mean: None,
        runs_zero: None,
        acf: None,
        ljung_box: None,
        adf: None,
        hp: None,
    };
    let place = format!("{market} / {}", period.label);
    if r.is_empty() {
        w.push(format!("{place}: no observations in period; all tests skipped"));
        return (out, w);
    }

    out.descriptive = warn(&mut w, &place, "descriptive statistics", describe(r));
    out.jarque_bera = out.descriptive.as_ref().map(jarque_bera);
    out.runs_mean = warn(&mut w, &place, "runs test (mean)", runs_test(returns, RunsReference::Mean));
    out.runs_zero = warn(&mut w, &place, "runs test (zero)", runs_test(returns, RunsReference::Zero));
    out.acf = warn(&mut w, &place, "autocorrelation", acf(r, settings.acf_lags, settings.acf_mode));
    if let Some(a) = &out.acf {
        out.ljung_box = warn(&mut w, &place, "Ljung-Box", ljung_box(a, r.len(), settings.ljung_box_horizon));
    }

    let target: Vec<f64> = match settings.adf_target {
        AdfTarget::Returns => r.to_vec(),
        AdfTarget::LogPrices => prices.log_prices(),
    };
    let lags = settings.adf_lags.unwrap_or_else(|| default_lag(target.len()));
    out.adf = warn(
        &mut w,
        &place,
        "ADF",
        adf_test(&target, lags, settings.adf_model, settings.adf_target),
    );

    out.hp = warn(
        &mut w,
        &place,
        "HP filter",
        hp_filter(r, settings.hp_lambda).map(|d| HpSummary {
            lambda: d.lambda,
            n: d.trend.len(),
            objective_value: d.objective_value,
            trend_std: std_dev(&d.trend),
            cycle_std: std_dev(&d.cycle),
            trend_min: d.trend.iter().copied().fold(f64::INFINITY, f64::min),
            trend_max: d.trend.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }),
    );
    (out, w)
}

fn analyze_market(
    prices: &PriceSeries,
    returns: &ReturnSeries,
    ingest: IngestReport,
    scheme: &PeriodScheme,
    settings: &ReportSettings,
) -> (MarketReport, Vec<String>) {
    let r_parts = segment(returns, scheme);
    let p_parts = segment(prices, scheme);
    let periods: Vec<&crate::series::Period> = scheme.periods().collect();
    let results: Vec<(PeriodReport, Vec<String>)> = periods
        .par_iter()
        .zip(r_parts.parts.par_iter().zip(p_parts.parts.par_iter()))
        .map(|(period, ((_, r), (_, p)))| analyze_period(prices.index_name(), period, r, p, settings))
        .collect();
    let mut warnings = Vec::new();
    let mut out = Vec::with_capacity(results.len());
    for (rep, w) in results {
        out.push(rep);
        warnings.extend(w);
    }
    (
        MarketReport {
            index_name: prices.index_name().to_string(),
            ingest,
            periods: out,
        },
        warnings,
    )
}

fn cross_block(a: &PriceSeries, b: &PriceSeries, scheme: &PeriodScheme, warnings: &mut Vec<String>) -> Result<CrossReport> {
    let pair = align(a, b)?;
    let (pa, pb) = pair.to_series()?;
    let (ra, rb) = (compute_returns(&pa)?, compute_returns(&pb)?);
    let (pa_s, pb_s) = (segment(&pa, scheme), segment(&pb, scheme));
    let (ra_s, rb_s) = (segment(&ra, scheme), segment(&rb, scheme));
    let mut periods = Vec::new();
    for (i, period) in scheme.periods().enumerate() {
        let place = format!("{} x {} / {}", a.index_name(), b.index_name(), period.label);
        let (xa, xb) = (&pa_s.parts[i].1, &pb_s.parts[i].1);
        let (ya, yb) = (&ra_s.parts[i].1, &rb_s.parts[i].1);
        periods.push(CrossPeriod {
            label: period.label.clone(),
            observations: ya.len(),
            price_correlation: warn(warnings, &place, "price correlation", pearson(xa.prices(), xb.prices())),
            return_correlation: warn(warnings, &place, "return correlation", pearson(ya.returns(), yb.returns())),
        });
    }
    Ok(CrossReport {
        a_name: pair.a_name.clone(),
        b_name: pair.b_name.clone(),
        aligned_dates: pair.len(),
        fill_count_a: pair.fill_count_a,
        fill_count_b: pair.fill_count_b,
        periods,
    })
}

/// Runs the battery on already-parsed series.
pub fn analyze_series(
    inputs: Vec<(PriceSeries, IngestReport)>,
    cfg: &AnalysisConfig,
) -> Result<Analysis> {
    let settings = ReportSettings::from_config(cfg);
    let mut warnings = Vec::new();
    let mut markets = Vec::new();
    let mut data = Vec::new();
    for (prices, ingest) in inputs {
        let returns = compute_returns(&prices)?;
        let (m, w) = analyze_market(&prices, &returns, ingest, &cfg.scheme, &settings);
        markets.push(m);
        warnings.extend(w);
        data.push(MarketData { prices, returns });
    }
    let cross = if data.len() == 2 {
        let r = cross_block(&data[0].prices, &data[1].prices, &cfg.scheme, &mut warnings);
        warn(&mut warnings, "cross-market", "alignment", r)
    } else {
        None
    };
    let mc_validation = if cfg.mc_validate {
        Some(validation_battery(cfg.seed)?)
    } else {
        None
    };
    Ok(Analysis {
        report: Report {
            scheme: cfg.scheme.clone(),
            settings,
            markets,
            cross,
            mc_validation,
            warnings,
        },
        data,
    })
}

pub fn load_input(input: &InputSpec) -> Result<(PriceSeries, IngestReport)> {
    let bytes = std::fs::read(&input.path).map_err(|e| Error::Io(e).context(format!("reading '{}'", input.path.display())))?;
    parse_price_csv(&bytes, &input.schema, &input.index_name)
        .map_err(|e| e.context(format!("input '{}' ({})", input.index_name, input.path.display())))
}

/// Ingest, per-period battery, and the optional cross-market block.
pub fn run_analysis(cfg: &AnalysisConfig) -> Result<Analysis> {
    cfg.validate()?;
    let inputs = cfg.inputs.iter().map(load_input).collect::<Result<Vec<_>>>()?;
    analyze_series(inputs, cfg)
}

/// Runs the analysis and writes every configured output under
/// `cfg.output_dir`. Returns the analysis and the written file names.
pub fn run_and_write(cfg: &AnalysisConfig) -> Result<(Analysis, Vec<String>)> {
    let analysis = run_analysis(cfg)?;
    let mut files = write_outputs(&analysis.report, &cfg.formats, &cfg.output_dir)?;
    if cfg.plots {
        files.extend(emit_plots(&analysis, &cfg.output_dir)?);
    }
    Ok((analysis, files))
}

/// Lower-case, filesystem-safe form of a label.
pub(crate) fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    let trimmed = out.trim_matches('_');
    if trimmed.is_empty() {
        "x".into()
    } else {
        trimmed.to_string()
    }
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(e).context(format!("creating '{}'", dir.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Period;
    use crate::sim::{generate, GeneratorSpec};

    fn synthetic(name: &str, seed: u64, n: usize) -> (PriceSeries, IngestReport) {
        let r = generate(&GeneratorSpec::iid_gaussian(n, 0.01, seed)).unwrap();
        let mut date = TradingDate::from_ymd(2000, 1, 1).unwrap();
        let mut p = 100.0;
        let mut obs = vec![(date, p)];
        for x in r {
            date = date.succ();
            p *= 1.0 + x;
            obs.push((date, p));
        }
        let s = PriceSeries::new(name, obs).unwrap();
        let ingest = IngestReport {
            rows_read: s.len(),
            rows_dropped: 0,
            drop_reasons: vec![],
            date_range: Some((s.dates()[0], *s.dates().last().unwrap())),
            reordered: false,
            price_column_used: "Close".into(),
        };
        (s, ingest)
    }

    fn scheme() -> PeriodScheme {
        let d = |y, m, day| TradingDate::from_ymd(y, m, day).unwrap();
        PeriodScheme::from_entries(vec![
            Period::new("All", d(2000, 1, 1), d(2010, 12, 31)),
            Period::new("A", d(2000, 1, 1), d(2001, 12, 31)),
            Period::new("B", d(2002, 1, 1), d(2003, 12, 31)),
        ])
        .unwrap()
    }

    #[test]
    fn two_market_report() {
        let cfg = AnalysisConfig {
            scheme: scheme(),
            ..AnalysisConfig::default()
        };
        let a = analyze_series(vec![synthetic("A", 1, 1200), synthetic("B", 2, 1200)], &cfg).unwrap();
        let rep = &a.report;
        assert!(rep.warnings.is_empty(), "{:?}", rep.warnings);
        assert_eq!(rep.markets.len(), 2);
        for m in &rep.markets {
            let labels: Vec<&str> = m.periods.iter().map(|p| p.label.as_str()).collect();
            assert_eq!(labels, ["All", "A", "B"]);
            assert_eq!(m.periods[0].observations, 1200);
            assert_eq!(m.periods[1].observations + m.periods[2].observations, 1200);
            assert!(m.periods.iter().all(|p| p.adf.is_some() && p.hp.is_some() && p.ljung_box.is_some()));
        }
        let cross = rep.cross.as_ref().unwrap();
        assert_eq!(cross.periods.len(), 3);
        assert_eq!((cross.fill_count_a, cross.fill_count_b), (0, 0));
        // independent draws are nearly uncorrelated
        assert!(cross.periods[0].return_correlation.unwrap().abs() < 0.15);

        let back = Report::from_json(&rep.to_json().unwrap()).unwrap();
        assert_eq!(&back, rep);
    }

    #[test]
    fn single_period_scheme() {
        let d = |y, m, day| TradingDate::from_ymd(y, m, day).unwrap();
        let cfg = AnalysisConfig {
            scheme: PeriodScheme::single(Period::new("Only", d(1990, 1, 1), d(2030, 1, 1))),
            ..AnalysisConfig::default()
        };
        let a = analyze_series(vec![synthetic("A", 5, 300)], &cfg).unwrap();
        assert_eq!(a.report.markets[0].periods.len(), 1);
        assert!(a.report.cross.is_none());
    }

    #[test]
    fn failing_period_becomes_warning() {
        let d = |y, m, day| TradingDate::from_ymd(y, m, day).unwrap();
        let cfg = AnalysisConfig {
            scheme: PeriodScheme::from_entries(vec![
                Period::new("Main", d(2000, 1, 1), d(2000, 12, 31)),
                Period::new("Tiny", d(2001, 1, 1), d(2001, 1, 10)),
                Period::new("Empty", d(2020, 1, 1), d(2020, 12, 31)),
            ])
            .unwrap(),
            ..AnalysisConfig::default()
        };
        let a = analyze_series(vec![synthetic("A", 9, 380)], &cfg).unwrap();
        let m = &a.report.markets[0];
        assert!(m.periods[0].adf.is_some());
        assert!(m.periods[1].acf.is_none() && m.periods[1].descriptive.is_some());
        assert!(m.periods[2].descriptive.is_none());
        let empty_warnings = a.report.warnings.iter().filter(|w| w.contains("/ Empty")).count();
        assert_eq!(empty_warnings, 1);
        assert!(a.report.warnings.iter().any(|w| w.contains("/ Tiny: autocorrelation skipped")));
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("SSE Composite"), "sse_composite");
        assert_eq!(slug("I"), "i");
        assert_eq!(slug("--"), "x");
    }
}
