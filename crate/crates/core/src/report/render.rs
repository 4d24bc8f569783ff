//! Table layout and Markdown / CSV / JSON serialization.

use std::path::Path;

use crate::error::{Error, Result};
use crate::randomness::{RunsResult, Z_CRIT_5PCT};
use crate::stats::ALPHA;

use super::config::OutputFormat;
use super::{ensure_dir, slug, MarketReport, PeriodReport, Report};

const MISSING: &str = "n/a";

/// Four decimals; scientific (`1.2345e+04`) when |x| ≥ 1e4 or 0 < |x| < 1e-3.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.0000".into();
    }
    let a = x.abs();
    if !(1e-3..1e4).contains(&a) {
        let s = format!("{x:.4e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent present");
        let exp: i32 = exp.parse().expect("integer exponent");
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        format!("{x:.4}")
    }
}

/// p-values print with four decimals, floored at `0.0001`.
pub fn fmt_p(p: f64) -> String {
    if p.is_nan() {
        return "NaN".into();
    }
    format!("{:.4}", p.max(1e-4))
}

fn opt<T>(v: Option<T>, f: impl FnOnce(T) -> String) -> String {
    v.map(f).unwrap_or_else(|| MISSING.to_string())
}

/// One rendered table: a header row and string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Used for CSV file names.
    pub key: String,
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub legend: Vec<String>,
}

fn column_header(p: &PeriodReport) -> String {
    format!(
        "{} ({:02}/{:02}-{:02}/{:02})",
        p.label,
        p.start.month(),
        p.start.year().rem_euclid(100),
        p.end.month(),
        p.end.year().rem_euclid(100)
    )
}

fn header(first: &str, periods: &[PeriodReport]) -> Vec<String> {
    std::iter::once(first.to_string()).chain(periods.iter().map(column_header)).collect()
}

fn row(label: &str, periods: &[PeriodReport], f: impl Fn(&PeriodReport) -> String) -> Vec<String> {
    std::iter::once(label.to_string()).chain(periods.iter().map(f)).collect()
}

fn descriptive_table(m: &MarketReport) -> Table {
    let p = &m.periods;
    let d = |f: fn(&crate::stats::DescriptiveStats) -> f64| move |r: &PeriodReport| opt(r.descriptive.as_ref(), |d| fmt_num(f(d)));
    Table {
        key: format!("{}_descriptive", slug(&m.index_name)),
        title: format!("Descriptive statistics for the returns of {}", m.index_name),
        header: header("", p),
        rows: vec![
            row("Start", p, |r| opt(r.first_date, |d| d.to_string())),
            row("End", p, |r| opt(r.last_date, |d| d.to_string())),
            row("Observations", p, |r| r.observations.to_string()),
            row("Mean returns", p, d(|s| s.mean)),
            row("Max. returns", p, d(|s| s.max)),
            row("Min. returns", p, d(|s| s.min)),
            row("Std. deviation", p, d(|s| s.std_dev)),
            row("Skewness", p, d(|s| s.skewness)),
            row("Kurtosis", p, d(|s| s.kurtosis)),
            row("Jarque-Bera", p, |r| opt(r.jarque_bera.as_ref(), |t| fmt_num(t.statistic))),
            row("JB p-value", p, |r| {
                opt(r.jarque_bera.as_ref(), |t| {
                    format!("{}{}", fmt_p(t.p_value), if t.p_value < ALPHA { "*" } else { "" })
                })
            }),
        ],
        legend: vec![
            "`*` marks rejection of normality at the 5% level.".into(),
            "Std. deviation uses divisor n - 1; skewness and kurtosis use population moments (normal kurtosis = 3).".into(),
        ],
    }
}

fn runs_pair(r: &PeriodReport, f: impl Fn(&RunsResult) -> String) -> String {
    format!(
        "{} ({})",
        opt(r.runs_mean.as_ref(), &f),
        opt(r.runs_zero.as_ref(), &f)
    )
}

fn runs_table(m: &MarketReport) -> Table {
    let p = &m.periods;
    let z = |x: &RunsResult| format!("{}{}", fmt_num(x.z), if x.z.abs() <= Z_CRIT_5PCT { "*" } else { "" });
    Table {
        key: format!("{}_runs", slug(&m.index_name)),
        title: format!("Runs tests for the returns of {} relative to mean (zero)", m.index_name),
        header: header("", p),
        rows: vec![
            row("N", p, |r| r.observations.to_string()),
            row("Nruns", p, |r| runs_pair(r, |x| x.n_runs.to_string())),
            row("n1", p, |r| runs_pair(r, |x| x.n_above.to_string())),
            row("n0", p, |r| runs_pair(r, |x| x.n_below.to_string())),
            row("n2", p, |r| runs_pair(r, |x| x.n_equal.to_string())),
            row("Z", p, |r| runs_pair(r, z)),
            row("p-value", p, |r| runs_pair(r, |x| fmt_p(x.p_value))),
        ],
        legend: vec![
            "Cells read `mean-reference (zero-reference)`.".into(),
            "n1 above, n0 below, n2 equal to the reference; equal values are excluded from the runs.".into(),
            "`*` marks a Z that does NOT reject randomness at the 5% level (|Z| <= 1.96). Z is signed.".into(),
        ],
    }
}

fn adf_table(m: &MarketReport, settings: &super::ReportSettings) -> Table {
    let p = &m.periods;
    Table {
        key: format!("{}_adf", slug(&m.index_name)),
        title: format!(
            "ADF test for the {} of {} (model {})",
            match settings.adf_target {
                crate::unitroot::AdfTarget::Returns => "returns",
                crate::unitroot::AdfTarget::LogPrices => "log prices",
            },
            m.index_name,
            settings.adf_model
        ),
        header: header("", p),
        rows: vec![
            row("ADF Test Statistic", p, |r| opt(r.adf.as_ref(), |a| fmt_num(a.tau))),
            row("p-value", p, |r| opt(r.adf.as_ref(), |a| fmt_p(a.p_value))),
            row("Number of Lags", p, |r| opt(r.adf.as_ref(), |a| a.lags.to_string())),
            row("Number of Observations", p, |r| opt(r.adf.as_ref(), |a| (a.n_obs + a.lags + 1).to_string())),
            row("Regression Rows", p, |r| opt(r.adf.as_ref(), |a| a.n_obs.to_string())),
        ],
        legend: vec![
            "p-values interpolate the Dickey-Fuller tau table and are clamped to [0.01, 0.99].".into(),
            "Default lags are floor((n - 1)^(1/3)).".into(),
        ],
    }
}

fn acf_table(m: &MarketReport, settings: &super::ReportSettings) -> Table {
    let p = &m.periods;
    let mut rows = Vec::new();
    for k in 0..settings.acf_lags {
        rows.push(row(&(k + 1).to_string(), p, |r| {
            opt(r.acf.as_ref(), |a| match a.t_values() {
                Some(t) => format!("{} ({})", fmt_num(a.rho[k]), fmt_num(t[k])),
                None => fmt_num(a.rho[k]),
            })
        }));
    }
    rows.push(row("Standard Deviation", p, |r| {
        opt(r.acf.as_ref().and_then(|a| a.sd_rho), fmt_num)
    }));
    rows.push(row("Standard Error", p, |r| opt(r.acf.as_ref().and_then(|a| a.se()), fmt_num)));
    rows.push(row("Ljung Box Q-Stat", p, |r| {
        opt(r.ljung_box.as_ref(), |q| {
            format!("{}{}", fmt_num(q.statistic), if q.p_value < ALPHA { "*" } else { "" })
        })
    }));
    rows.push(row("p-value", p, |r| opt(r.ljung_box.as_ref(), |q| fmt_p(q.p_value))));
    let se_note = match settings.acf_mode {
        crate::randomness::AcfMode::Appendix => "t-values use se = 1/sqrt(n).",
        crate::randomness::AcfMode::PaperTable => {
            "t-values use se = sd(rho_1..rho_K)/sqrt(K), the printed-table convention; Standard Deviation is sd(rho)."
        }
    };
    Table {
        key: format!("{}_acf", slug(&m.index_name)),
        title: format!("Serial correlation coefficients for returns of {} (t-values)", m.index_name),
        header: header("Lag", p),
        rows,
        legend: vec![
            se_note.into(),
            format!(
                "Ljung-Box Q uses {} lags; `*` marks rejection of no autocorrelation at the 5% level.",
                settings.ljung_box_horizon
            ),
        ],
    }
}

fn hp_table(m: &MarketReport) -> Table {
    let p = &m.periods;
    let h = |f: fn(&super::HpSummary) -> f64| move |r: &PeriodReport| opt(r.hp.as_ref(), |h| fmt_num(f(h)));
    Table {
        key: format!("{}_hp", slug(&m.index_name)),
        title: format!("Hodrick-Prescott smoothing of returns of {}", m.index_name),
        header: header("", p),
        rows: vec![
            row("Lambda", p, h(|s| s.lambda)),
            row("Observations", p, |r| opt(r.hp.as_ref(), |h| h.n.to_string())),
            row("Objective", p, h(|s| s.objective_value)),
            row("Trend std. deviation", p, h(|s| s.trend_std)),
            row("Cycle std. deviation", p, h(|s| s.cycle_std)),
            row("Trend min.", p, h(|s| s.trend_min)),
            row("Trend max.", p, h(|s| s.trend_max)),
        ],
        legend: vec![],
    }
}

/// Every table of the report, in document order.
pub fn tables(report: &Report) -> Vec<Table> {
    let mut out = Vec::new();
    for m in &report.markets {
        out.push(descriptive_table(m));
        out.push(runs_table(m));
        out.push(adf_table(m, &report.settings));
        out.push(acf_table(m, &report.settings));
        out.push(hp_table(m));
    }
    if let Some(c) = &report.cross {
        let mut header = vec![String::new()];
        header.extend(report.markets[0].periods.iter().map(column_header));
        let cells = |f: &dyn Fn(&super::CrossPeriod) -> String| -> Vec<String> { c.periods.iter().map(f).collect() };
        let mut r_returns = vec!["Returns".to_string()];
        r_returns.extend(cells(&|x| opt(x.return_correlation, fmt_num)));
        let mut r_prices = vec!["Prices".to_string()];
        r_prices.extend(cells(&|x| opt(x.price_correlation, fmt_num)));
        let mut r_obs = vec!["Aligned returns".to_string()];
        r_obs.extend(cells(&|x| x.observations.to_string()));
        out.push(Table {
            key: "correlation".into(),
            title: format!("Correlations between {} and {}: prices and returns", c.a_name, c.b_name),
            header,
            rows: vec![r_returns, r_prices, r_obs],
            legend: vec![format!(
                "Calendars aligned by carrying the last close forward over {} dates ({} filled for {}, {} for {}); returns are computed after alignment.",
                c.aligned_dates, c.fill_count_a, c.a_name, c.fill_count_b, c.b_name
            )],
        });
    }
    if let Some(checks) = &report.mc_validation {
        out.push(Table {
            key: "mc_validation".into(),
            title: "Monte-Carlo calibration checks".into(),
            header: ["Check", "Test", "Trials", "Rejection rate", "95% CI half-width", "Band", "Result"]
                .map(String::from)
                .to_vec(),
            rows: checks
                .iter()
                .map(|c| {
                    vec![
                        c.label.clone(),
                        c.result.test_name.clone(),
                        c.result.trials.to_string(),
                        fmt_num(c.result.rejection_rate),
                        fmt_num(c.result.ci_halfwidth),
                        format!("[{}, {}]", fmt_num(c.lower), fmt_num(c.upper)),
                        if c.passed() { "pass" } else { "FAIL" }.into(),
                    ]
                })
                .collect(),
            legend: vec![],
        });
    }
    out
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

fn markdown(report: &Report) -> String {
    let s = &report.settings;
    let mut out = String::from("# Weak-form efficiency report\n\n");
    out.push_str(&format!("- Periods: `{}`\n", report.scheme));
    out.push_str(&format!(
        "- ACF mode: {}, lags: {}, Ljung-Box horizon: {}\n",
        s.acf_mode, s.acf_lags, s.ljung_box_horizon
    ));
    out.push_str(&format!(
        "- ADF: model {}, target {}, lags {}\n",
        s.adf_model,
        s.adf_target,
        s.adf_lags.map(|q| q.to_string()).unwrap_or_else(|| "default rule".into())
    ));
    out.push_str(&format!("- HP lambda: {}\n", fmt_num(s.hp_lambda)));
    for m in &report.markets {
        let i = &m.ingest;
        out.push_str(&format!(
            "- {}: {} rows read, {} dropped, price column `{}`{}{}\n",
            m.index_name,
            i.rows_read,
            i.rows_dropped,
            i.price_column_used,
            i.date_range.map(|(a, b)| format!(", {a} to {b}")).unwrap_or_default(),
            if i.reordered { ", rows reordered" } else { "" }
        ));
    }
    for t in tables(report) {
        out.push_str(&format!("\n## {}\n\n", t.title));
        out.push_str(&format!("| {} |\n", t.header.iter().map(|h| md_escape(h)).collect::<Vec<_>>().join(" | ")));
        out.push_str(&format!("|{}\n", "---|".repeat(t.header.len())));
        for r in &t.rows {
            out.push_str(&format!("| {} |\n", r.iter().map(|c| md_escape(c)).collect::<Vec<_>>().join(" | ")));
        }
        if !t.legend.is_empty() {
            out.push('\n');
            for l in &t.legend {
                out.push_str(&format!("> {l}\n"));
            }
        }
    }
    out.push_str("\n## Warnings\n\n");
    if report.warnings.is_empty() {
        out.push_str("None.\n");
    } else {
        for w in &report.warnings {
            out.push_str(&format!("- {w}\n"));
        }
    }
    out
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidInput(format!("CSV rendering: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::InvalidInput(format!("CSV rendering: {e}")))
}

/// Serializes the report as `(file name, bytes)` pairs.
pub fn render(report: &Report, format: OutputFormat) -> Result<Vec<(String, Vec<u8>)>> {
    Ok(match format {
        OutputFormat::Markdown => vec![("report.md".into(), markdown(report).into_bytes())],
        OutputFormat::Json => {
            let mut s = report.to_json()?;
            s.push('\n');
            vec![("report.json".into(), s.into_bytes())]
        }
        OutputFormat::Csv => {
            let mut files = Vec::new();
            for t in tables(report) {
                files.push((format!("{}.csv", t.key), csv_bytes(&t.header, &t.rows)?));
            }
            let warnings: Vec<Vec<String>> = report.warnings.iter().map(|w| vec![w.clone()]).collect();
            files.push(("warnings.csv".into(), csv_bytes(&["warning".to_string()], &warnings)?));
            files
        }
    })
}

/// Writes each format under `dir`; returns the file names in write order.
pub fn write_outputs(report: &Report, formats: &[OutputFormat], dir: &Path) -> Result<Vec<String>> {
    ensure_dir(dir)?;
    let mut names = Vec::new();
    for &f in formats {
        for (name, bytes) in render(report, f)? {
            let path = dir.join(&name);
            std::fs::write(&path, bytes).map_err(|e| Error::Io(e).context(format!("writing '{}'", path.display())))?;
            names.push(name);
        }
    }
    Ok(names)
}
