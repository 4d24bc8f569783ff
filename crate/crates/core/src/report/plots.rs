//! Self-contained SVG charts. Output bytes depend only on the input data.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hp::hp_filter;
use crate::randomness::{AcfResult, Z_CRIT_5PCT};
use crate::series::segment;
use crate::stats::normal_icdf;

use super::{ensure_dir, slug, Analysis, PeriodReport};

const W: f64 = 720.0;
const H: f64 = 400.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if !(1e-3..1e4).contains(&a) {
        format!("{v:.1e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else if a >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.4}")
    }
}

fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (-1.0, 1.0);
    }
    if hi > lo {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    }
}

fn extent<'a>(vals: impl IntoIterator<Item = &'a f64>) -> (f64, f64) {
    vals.into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

struct Chart {
    body: String,
    x: (f64, f64),
    y: (f64, f64),
}

impl Chart {
    fn new(title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let mut c = Chart {
            body: String::new(),
            x: padded_range(x.0, x.1),
            y: padded_range(y.0, y.1),
        };
        let _ = write!(
            c.body,
            r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>
<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>
<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>
<text x="16" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {:.2})">{}</text>
<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>
"#,
            W / 2.0,
            xml_escape(title),
            LEFT + (W - LEFT - RIGHT) / 2.0,
            H - 10.0,
            xml_escape(xlabel),
            TOP + (H - TOP - BOTTOM) / 2.0,
            TOP + (H - TOP - BOTTOM) / 2.0,
            xml_escape(ylabel),
            W - LEFT - RIGHT,
            H - TOP - BOTTOM,
        );
        c
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }

    fn y_ticks(&mut self) {
        for i in 0..=4 {
            let v = self.y.0 + (self.y.1 - self.y.0) * i as f64 / 4.0;
            let y = self.py(v);
            let _ = writeln!(
                self.body,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#,
                LEFT - 4.0,
                LEFT - 6.0,
                y + 3.0,
                tick_label(v)
            );
        }
    }

    fn x_ticks(&mut self, labels: &[(f64, String)]) {
        for (v, label) in labels {
            let x = self.px(*v);
            let _ = writeln!(
                self.body,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
                H - BOTTOM,
                H - BOTTOM + 4.0,
                H - BOTTOM + 16.0,
                xml_escape(label)
            );
        }
    }

    fn numeric_x_ticks(&mut self) {
        let labels: Vec<(f64, String)> = (0..=4)
            .map(|i| {
                let v = self.x.0 + (self.x.1 - self.x.0) * i as f64 / 4.0;
                (v, tick_label(v))
            })
            .collect();
        self.x_ticks(&labels);
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str, width: f64) {
        let mut s = String::with_capacity(pts.len() * 16);
        for (x, y) in pts {
            let _ = write!(s, "{:.2},{:.2} ", self.px(*x), self.py(*y));
        }
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{}"/>"#,
            s.trim_end()
        );
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), color: &str, dashed: bool) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}"{}/>"#,
            self.px(a.0),
            self.py(a.1),
            self.px(b.0),
            self.py(b.1),
            if dashed { r#" stroke-dasharray="5,4""# } else { "" }
        );
    }

    fn bar(&mut self, x0: f64, x1: f64, height: f64) {
        let (l, r) = (self.px(x0), self.px(x1));
        let (top, base) = (self.py(height), self.py(0.0));
        let _ = writeln!(
            self.body,
            r##"<rect x="{l:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="#3182bd"/>"##,
            r - l,
            base - top
        );
    }

    fn dot(&mut self, x: f64, y: f64) {
        let _ = writeln!(
            self.body,
            r##"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="#3182bd"/>"##,
            self.px(x),
            self.py(y)
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\">\n{}</svg>\n",
            self.body
        )
    }
}

/// A chart frame with a centred note in place of data.
fn placeholder(title: &str, note: &str) -> String {
    let mut c = Chart::new(title, "", "", (0.0, 1.0), (0.0, 1.0));
    let _ = writeln!(
        c.body,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="16" fill="gray">{}</text>"#,
        W / 2.0,
        H / 2.0,
        xml_escape(note)
    );
    c.finish()
}

fn date_ticks(dates: &[crate::series::TradingDate]) -> Vec<(f64, String)> {
    if dates.is_empty() {
        return Vec::new();
    }
    let last = dates.len() - 1;
    let mut idx: Vec<usize> = (0..=4).map(|i| last * i / 4).collect();
    idx.dedup();
    idx.into_iter().map(|i| (i as f64, dates[i].to_string())).collect()
}

fn series_plot(title: &str, ylabel: &str, dates: &[crate::series::TradingDate], values: &[f64]) -> String {
    if values.len() < 2 {
        return placeholder(title, "insufficient data");
    }
    let mut c = Chart::new(title, "date", ylabel, (0.0, (values.len() - 1) as f64), extent(values));
    c.y_ticks();
    c.x_ticks(&date_ticks(dates));
    let pts: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, v)| (i as f64, *v)).collect();
    c.polyline(&pts, "#08519c", 1.0);
    c.finish()
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    (m, sd)
}

fn histogram(title: &str, values: &[f64]) -> String {
    if values.len() < 2 {
        return placeholder(title, "insufficient data");
    }
    let (lo, hi) = extent(values);
    if lo == hi {
        return placeholder(title, "zero variance");
    }
    let (m, sd) = mean_sd(values);
    let bins = ((values.len() as f64).sqrt().ceil() as usize).clamp(5, 60);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = values.len() as f64;
    // fitted normal density scaled to counts
    let curve: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / 200.0;
            let z = (x - m) / sd;
            (x, n * width * (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt()))
        })
        .collect();
    let top = counts.iter().copied().max().unwrap_or(1) as f64;
    let top = curve.iter().map(|p| p.1).fold(top, f64::max);
    let mut c = Chart::new(title, "return", "count", (lo, hi), (0.0, top));
    c.y_ticks();
    c.numeric_x_ticks();
    for (i, &k) in counts.iter().enumerate() {
        let x0 = lo + i as f64 * width;
        c.bar(x0, x0 + width, k as f64);
    }
    c.polyline(&curve, "#de2d26", 1.5);
    c.finish()
}

/// `(normal_icdf((i - 0.5)/n), x_(i))` for the ascending order statistics.
pub fn normal_probability_points(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("probability plot of an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("probability plot input contains non-finite values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, x)| Ok((normal_icdf((i as f64 + 0.5) / n)?, x)))
        .collect()
}

fn probability_plot(title: &str, values: &[f64]) -> String {
    if values.len() < 2 {
        return placeholder(title, "insufficient data");
    }
    let (lo, hi) = extent(values);
    if lo == hi {
        return placeholder(title, "zero variance");
    }
    let pts = normal_probability_points(values).expect("finite non-empty sample");
    let (m, sd) = mean_sd(values);
    let q = (pts[0].0, pts[pts.len() - 1].0);
    let mut c = Chart::new(title, "standard normal quantile", "ordered return", q, (lo, hi));
    c.y_ticks();
    c.numeric_x_ticks();
    c.line((q.0, m + sd * q.0), (q.1, m + sd * q.1), "#de2d26", true);
    for (x, y) in pts {
        c.dot(x, y);
    }
    c.finish()
}

fn acf_plot(title: &str, acf: Option<&AcfResult>) -> String {
    let Some(a) = acf else {
        return placeholder(title, "autocorrelation unavailable");
    };
    let k = a.max_lag() as f64;
    let band = a.se().map(|se| Z_CRIT_5PCT * se);
    let (lo, hi) = extent(a.rho.iter().chain(&[0.0]));
    let (lo, hi) = match band {
        Some(b) => (lo.min(-b), hi.max(b)),
        None => (lo, hi),
    };
    let mut c = Chart::new(title, "lag", "autocorrelation", (0.0, k + 1.0), (lo, hi));
    c.y_ticks();
    let ticks: Vec<(f64, String)> = a.lags.iter().filter(|l| **l == 1 || *l % 5 == 0).map(|l| (*l as f64, l.to_string())).collect();
    c.x_ticks(&ticks);
    c.line((0.0, 0.0), (k + 1.0, 0.0), "black", false);
    if let Some(b) = band {
        c.line((0.0, b), (k + 1.0, b), "#de2d26", true);
        c.line((0.0, -b), (k + 1.0, -b), "#de2d26", true);
    }
    for (lag, r) in a.lags.iter().zip(&a.rho) {
        c.line((*lag as f64, 0.0), (*lag as f64, *r), "#08519c", false);
        c.dot(*lag as f64, *r);
    }
    c.finish()
}

fn hp_plot(title: &str, dates: &[crate::series::TradingDate], values: &[f64], lambda: f64) -> String {
    let Ok(d) = hp_filter(values, lambda) else {
        return placeholder(title, "HP filter unavailable");
    };
    let (lo, hi) = extent(values.iter().chain(&d.trend));
    let mut c = Chart::new(title, "date", "return", (0.0, (values.len() - 1) as f64), (lo, hi));
    c.y_ticks();
    c.x_ticks(&date_ticks(dates));
    let raw: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, v)| (i as f64, *v)).collect();
    let trend: Vec<(f64, f64)> = d.trend.iter().enumerate().map(|(i, v)| (i as f64, *v)).collect();
    c.polyline(&raw, "#bdbdbd", 0.8);
    c.polyline(&trend, "#de2d26", 1.8);
    c.finish()
}

fn period_plots(
    market: &str,
    p: &PeriodReport,
    prices: &crate::series::PriceSeries,
    returns: &crate::series::ReturnSeries,
    lambda: f64,
) -> Vec<(String, String)> {
    let r = returns.returns();
    let label = format!("{market}, {}", p.label);
    vec![
        ("prices", series_plot(&format!("{label}: closing prices"), "price", prices.dates(), prices.prices())),
        ("returns", series_plot(&format!("{label}: daily returns"), "return", returns.dates(), r)),
        ("histogram", histogram(&format!("{label}: return histogram with fitted normal"), r)),
        ("normal_probability", probability_plot(&format!("{label}: normal probability plot"), r)),
        ("acf", acf_plot(&format!("{label}: autocorrelation"), p.acf.as_ref())),
        ("hp", hp_plot(&format!("{label}: HP trend of returns"), returns.dates(), r, lambda)),
    ]
    .into_iter()
    .map(|(kind, svg)| (kind.to_string(), svg))
    .collect()
}

/// Writes six SVG charts per market and period under `dir/plots`; returns
/// the relative file names.
pub fn emit_plots(analysis: &Analysis, dir: &Path) -> Result<Vec<String>> {
    let plot_dir = dir.join("plots");
    ensure_dir(&plot_dir)?;
    let report = &analysis.report;
    let mut names = Vec::new();
    for (m, data) in report.markets.iter().zip(&analysis.data) {
        let p_parts = segment(&data.prices, &report.scheme);
        let r_parts = segment(&data.returns, &report.scheme);
        for (i, period) in m.periods.iter().enumerate() {
            let plots = period_plots(
                &m.index_name,
                period,
                &p_parts.parts[i].1,
                &r_parts.parts[i].1,
                report.settings.hp_lambda,
            );
            for (kind, svg) in plots {
                let name = format!("plots/{}_{}_{kind}.svg", slug(&m.index_name), slug(&period.label));
                let path = dir.join(&name);
                std::fs::write(&path, svg).map_err(|e| Error::Io(e).context(format!("writing '{}'", path.display())))?;
                names.push(name);
            }
        }
    }
    Ok(names)
}
