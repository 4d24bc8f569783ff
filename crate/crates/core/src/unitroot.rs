//! Ordinary least squares and the augmented Dickey-Fuller unit-root test.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot size below which a design column counts as collinear.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub n_obs: usize,
    pub n_params: usize,
}

/// Least squares through a Householder QR of the design.
pub fn ols(design: &DMatrix<f64>, response: &[f64]) -> Result<OlsFit> {
    let (n, p) = design.shape();
    if n != response.len() {
        return Err(Error::InvalidInput(format!(
            "design has {n} rows but response has {} values",
            response.len()
        )));
    }
    if p == 0 || n <= p {
        return Err(Error::InsufficientData {
            what: format!("regression with {p} parameters"),
            needed: p + 1,
            got: n,
        });
    }
    if design.iter().chain(response).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("regression input contains non-finite values".into()));
    }
    let col_norms: Vec<f64> = (0..p).map(|j| design.column(j).norm()).collect();
    let qr = design.clone().qr();
    let r = qr.r();
    for (j, norm) in col_norms.iter().enumerate() {
        if *norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * norm {
            return Err(Error::SingularDesign(format!("column {j} is linearly dependent on the others")));
        }
    }
    let y = DVector::from_column_slice(response);
    let qty = qr.q().transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))?;
    let fitted = design * &beta;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let s2 = rss / (n - p) as f64;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::SingularDesign("triangular inverse failed".into()))?;
    let std_errors: Vec<f64> = (0..p).map(|i| (s2 * r_inv.row(i).norm_squared()).sqrt()).collect();
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let t_stats = coefficients.iter().zip(&std_errors).map(|(b, se)| b / se).collect();
    Ok(OlsFit {
        coefficients,
        std_errors,
        t_stats,
        residuals,
        rss,
        n_obs: n,
        n_params: p,
    })
}

/// Deterministic terms in the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfModel {
    None,
    Drift,
    DriftTrend,
}

impl AdfModel {
    pub const ALL: [AdfModel; 3] = [AdfModel::None, AdfModel::Drift, AdfModel::DriftTrend];
}

impl fmt::Display for AdfModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdfModel::None => "none",
            AdfModel::Drift => "drift",
            AdfModel::DriftTrend => "drift_trend",
        })
    }
}

impl FromStr for AdfModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "none" | "nc" => Ok(AdfModel::None),
            "drift" | "c" => Ok(AdfModel::Drift),
            "drift_trend" | "trend" | "ct" => Ok(AdfModel::DriftTrend),
            other => Err(Error::Config(format!("unknown ADF model '{other}'"))),
        }
    }
}

/// What series the test was run on; recorded for reporting only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfTarget {
    Returns,
    LogPrices,
}

impl fmt::Display for AdfTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdfTarget::Returns => "returns",
            AdfTarget::LogPrices => "log_prices",
        })
    }
}

impl FromStr for AdfTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "returns" => Ok(AdfTarget::Returns),
            "log_prices" | "prices" => Ok(AdfTarget::LogPrices),
            other => Err(Error::Config(format!("unknown ADF target '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    /// t-ratio on the lagged level.
    pub tau: f64,
    pub lags: usize,
    pub model: AdfModel,
    /// Interpolated and clamped to [0.01, 0.99].
    pub p_value: f64,
    /// Regression sample size after differencing and lagging.
    pub n_obs: usize,
    pub target: AdfTarget,
    /// Estimated coefficient on the lagged level.
    pub gamma: f64,
}

impl AdfResult {
    pub fn rejects_unit_root(&self) -> bool {
        self.p_value < 0.05
    }
}

/// `floor((n - 1)^(1/3))`.
pub fn default_lag(n: usize) -> usize {
    let m = n.saturating_sub(1);
    let mut q = (m as f64).cbrt().floor() as usize;
    while (q + 1).pow(3) <= m {
        q += 1;
    }
    while q > 0 && q.pow(3) > m {
        q -= 1;
    }
    q
}

/// Regresses `Δy_t` on `y_{t-1}`, the model's deterministic terms, and `lags`
/// lagged differences; `tau` is the t-ratio on `y_{t-1}`.
pub fn adf_test(series: &[f64], lags: usize, model: AdfModel, target: AdfTarget) -> Result<AdfResult> {
    let len = series.len();
    if len < lags + 10 {
        return Err(Error::InsufficientData {
            what: format!("ADF test with {lags} lags"),
            needed: lags + 10,
            got: len,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("ADF input contains non-finite values".into()));
    }
    let diff: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    // Rows use diff[t] for t in lags..diff.len(); diff[t] = y[t+1] - y[t].
    let rows = diff.len() - lags;
    let deterministic = match model {
        AdfModel::None => 0,
        AdfModel::Drift => 1,
        AdfModel::DriftTrend => 2,
    };
    let cols = 1 + deterministic + lags;
    let mut design = DMatrix::<f64>::zeros(rows, cols);
    let mut response = Vec::with_capacity(rows);
    for (row, t) in (lags..diff.len()).enumerate() {
        response.push(diff[t]);
        design[(row, 0)] = series[t];
        let mut c = 1;
        if deterministic >= 1 {
            design[(row, c)] = 1.0;
            c += 1;
        }
        if deterministic == 2 {
            design[(row, c)] = (t + 1) as f64;
            c += 1;
        }
        for i in 1..=lags {
            design[(row, c)] = diff[t - i];
            c += 1;
        }
    }
    let fit = ols(&design, &response)?;
    if fit.rss <= 0.0 {
        return Err(Error::SingularDesign("ADF regression fits exactly; residual variance is zero".into()));
    }
    let tau = fit.t_stats[0];
    Ok(AdfResult {
        tau,
        lags,
        model,
        p_value: adf_pvalue(tau, model, rows),
        n_obs: rows,
        target,
        gamma: fit.coefficients[0],
    })
}

/// Sample sizes indexing the critical-value table rows.
const TABLE_N: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, 100_000.0];
/// Lower-tail probabilities indexing the table columns.
const TABLE_P: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99];

/// Dickey-Fuller τ quantiles (Fuller 1976, Table 8.5.2), one row per sample size.
const TAU_NONE: [[f64; 8]; 6] = [
    [-2.66, -2.26, -1.95, -1.60, 0.92, 1.33, 1.70, 2.16],
    [-2.62, -2.25, -1.95, -1.61, 0.91, 1.31, 1.66, 2.08],
    [-2.60, -2.24, -1.95, -1.61, 0.90, 1.29, 1.64, 2.03],
    [-2.58, -2.23, -1.95, -1.62, 0.89, 1.29, 1.63, 2.01],
    [-2.58, -2.23, -1.95, -1.62, 0.89, 1.28, 1.62, 2.00],
    [-2.58, -2.23, -1.95, -1.62, 0.89, 1.28, 1.62, 2.00],
];
#[allow(clippy::approx_constant)]
const TAU_DRIFT: [[f64; 8]; 6] = [
    [-3.75, -3.33, -3.00, -2.63, -0.37, 0.00, 0.34, 0.72],
    [-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66],
    [-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63],
    [-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62],
    [-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61],
    [-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60],
];
const TAU_TREND: [[f64; 8]; 6] = [
    [-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15],
    [-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24],
    [-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28],
    [-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31],
    [-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32],
    [-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33],
];

fn table(model: AdfModel) -> &'static [[f64; 8]; 6] {
    match model {
        AdfModel::None => &TAU_NONE,
        AdfModel::Drift => &TAU_DRIFT,
        AdfModel::DriftTrend => &TAU_TREND,
    }
}

/// Linear interpolation on increasing `xs`, clamped at both ends.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|v| *v <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Table quantiles of τ at sample size `n`, one per entry of [`critical_probabilities`].
pub fn critical_values(model: AdfModel, n: usize) -> [f64; 8] {
    let t = table(model);
    let mut out = [0.0; 8];
    for (j, slot) in out.iter_mut().enumerate() {
        let column: Vec<f64> = t.iter().map(|row| row[j]).collect();
        *slot = interp(&TABLE_N, &column, n as f64);
    }
    out
}

pub fn critical_probabilities() -> [f64; 8] {
    TABLE_P
}

/// Lower-tail p-value of τ, interpolated across the table and clamped to
/// [0.01, 0.99].
pub fn adf_pvalue(tau: f64, model: AdfModel, n: usize) -> f64 {
    if tau.is_nan() {
        return 0.99;
    }
    interp(&critical_values(model, n), &TABLE_P, tau)
}
