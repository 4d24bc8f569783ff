//! Hodrick-Prescott trend/cycle decomposition.
//!
//! The trend minimises `Σ(y_t - τ_t)² + λ Σ(Δ²τ_t)²`, i.e. solves
//! `(I + λDᵀD) τ = y` with `D` the second-difference operator. By the
//! Woodbury identity the cycle is `c = Dᵀ(DDᵀ + I/λ)⁻¹ D y`, and
//! `DDᵀ + I/λ` is a constant-band symmetric pentadiagonal matrix of size
//! n - 2. Solving for the cycle keeps large-λ solutions accurate, since errors
//! along the smooth modes are damped by `Dᵀ` instead of landing in the trend.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpDecomposition {
    pub trend: Vec<f64>,
    pub cycle: Vec<f64>,
    pub lambda: f64,
    pub objective_value: f64,
}

/// Sampling frequency for the `λ = 100 · PV²` rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    Daily,
    Monthly,
    Quarterly,
    Annual,
}

impl Frequency {
    pub fn period_value(self) -> f64 {
        match self {
            Frequency::Daily => 365.0,
            Frequency::Monthly => 12.0,
            Frequency::Quarterly => 4.0,
            Frequency::Annual => 1.0,
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frequency::Daily => "daily",
            Frequency::Monthly => "monthly",
            Frequency::Quarterly => "quarterly",
            Frequency::Annual => "annual",
        })
    }
}

impl FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "daily" => Ok(Frequency::Daily),
            "monthly" => Ok(Frequency::Monthly),
            "quarterly" => Ok(Frequency::Quarterly),
            "annual" | "yearly" => Ok(Frequency::Annual),
            other => Err(Error::Config(format!("unknown frequency '{other}'"))),
        }
    }
}

pub fn default_lambda(frequency: Frequency) -> f64 {
    let pv = frequency.period_value();
    100.0 * pv * pv
}

/// Value of the HP objective for a candidate trend.
pub fn hp_objective(y: &[f64], trend: &[f64], lambda: f64) -> f64 {
    let fit: f64 = y.iter().zip(trend).map(|(a, b)| (a - b) * (a - b)).sum();
    fit + lambda * hp_penalty(trend)
}

/// Sum of squared second differences.
pub fn hp_penalty(trend: &[f64]) -> f64 {
    trend
        .windows(3)
        .map(|w| {
            let d = w[2] - 2.0 * w[1] + w[0];
            d * d
        })
        .sum()
}

pub fn hp_filter(y: &[f64], lambda: f64) -> Result<HpDecomposition> {
    let n = y.len();
    if n < 4 {
        return Err(Error::InsufficientData {
            what: "HP filter".into(),
            needed: 4,
            got: n,
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("HP filter input contains non-finite values".into()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("HP lambda must be a finite non-negative number, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(HpDecomposition {
            trend: y.to_vec(),
            cycle: vec![0.0; n],
            lambda,
            objective_value: 0.0,
        });
    }

    let m = n - 2;
    // D y
    let mut rhs: Vec<f64> = y.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
    // DDᵀ has bands (6, -4, 1); the corner entries are 6 as well.
    let diag = vec![6.0 + 1.0 / lambda; m];
    let off1 = vec![-4.0; m.saturating_sub(1)];
    let off2 = vec![1.0; m.saturating_sub(2)];
    solve_sym_pentadiagonal(diag, off1, off2, &mut rhs)?;
    let z = rhs;

    // c = Dᵀ z
    let mut cycle = vec![0.0; n];
    for (i, zi) in z.iter().enumerate() {
        cycle[i] += zi;
        cycle[i + 1] -= 2.0 * zi;
        cycle[i + 2] += zi;
    }
    let trend: Vec<f64> = y.iter().zip(&cycle).map(|(a, c)| a - c).collect();
    let objective_value = hp_objective(y, &trend, lambda);
    Ok(HpDecomposition {
        trend,
        cycle,
        lambda,
        objective_value,
    })
}

/// Solves `A x = b` in place for symmetric positive-definite pentadiagonal
/// `A` given by its main diagonal and first two super-diagonals, using a
/// banded LDLᵀ factorisation.
pub fn solve_sym_pentadiagonal(mut d: Vec<f64>, mut e: Vec<f64>, mut f: Vec<f64>, b: &mut [f64]) -> Result<()> {
    let m = d.len();
    if b.len() != m || e.len() + 1 < m || f.len() + 2 < m {
        return Err(Error::InvalidInput("pentadiagonal band lengths do not match".into()));
    }
    // Factor: after the loop d holds D, e holds L's first sub-diagonal,
    // f holds L's second sub-diagonal.
    for i in 0..m {
        if i >= 1 {
            let l1_prev = e[i - 1];
            d[i] -= l1_prev * l1_prev * d[i - 1];
            if i >= 2 {
                let l2 = f[i - 2];
                d[i] -= l2 * l2 * d[i - 2];
            }
        }
        if !(d[i] > 0.0) {
            return Err(Error::SingularDesign("pentadiagonal system is not positive definite".into()));
        }
        // L[i+1][i] = (A[i+1][i] - L[i+1][i-1] L[i][i-1] D[i-1]) / D[i]
        if i + 1 < m {
            let mut a = e[i];
            if i >= 1 {
                a -= f[i - 1] * e[i - 1] * d[i - 1];
            }
            e[i] = a / d[i];
        }
        if i + 2 < m {
            f[i] /= d[i];
        }
    }
    // Forward: L u = b
    for i in 1..m {
        b[i] -= e[i - 1] * b[i - 1];
        if i >= 2 {
            b[i] -= f[i - 2] * b[i - 2];
        }
    }
    for (bi, di) in b.iter_mut().zip(&d) {
        *bi /= di;
    }
    // Backward: Lᵀ x = u
    for i in (0..m).rev() {
        if i + 1 < m {
            b[i] -= e[i] * b[i + 1];
        }
        if i + 2 < m {
            b[i] -= f[i] * b[i + 2];
        }
    }
    Ok(())
}
