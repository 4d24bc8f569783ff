//! Reference distributions: standard normal and chi-square.

use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail, `1 - Φ(x)` without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse standard normal CDF on the open interval (0, 1).
pub fn normal_icdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal quantile requires 0 < p < 1, got {p}")));
    }
    let mut x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    // One Newton step on the tail-accurate side tightens erfc_inv's result.
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if density > 0.0 {
        let err = if p < 0.5 { normal_cdf(x) - p } else { (1.0 - p) - normal_sf(x) };
        x -= err / density;
    }
    Ok(x)
}

/// Upper-tail probability of a chi-square variable with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: u32) -> f64 {
    assert!(df > 0, "chi-square needs positive degrees of freedom");
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(f64::from(df) / 2.0, x / 2.0).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Φ from the all-positive-term series
    /// erf(z) = 2/√π · e^{-z²} · Σ 2ⁿ z^{2n+1} / (1·3·…·(2n+1)).
    fn phi_series(x: f64) -> f64 {
        let z = x.abs() / std::f64::consts::SQRT_2;
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        while term > 1e-30 * sum {
            n += 1.0;
            term *= 2.0 * z * z / (2.0 * n + 1.0);
            sum += term;
        }
        let erf = 2.0 / std::f64::consts::PI.sqrt() * (-z * z).exp() * sum;
        let half = 0.5 * erf;
        if x >= 0.0 {
            0.5 + half
        } else {
            0.5 - half
        }
    }

    fn chi2_density(x: f64, df: u32) -> f64 {
        let k = f64::from(df) / 2.0;
        let ln_gamma = statrs::function::gamma::ln_gamma(k);
        ((k - 1.0) * x.ln() - x / 2.0 - k * 2f64.ln() - ln_gamma).exp()
    }

    /// 1 - ∫₀ˣ f(t) dt by composite Simpson.
    fn chi2_sf_simpson(x: f64, df: u32) -> f64 {
        let m = 200_000;
        let h = x / m as f64;
        let f = |t: f64| if t == 0.0 { if df == 2 { 0.5 } else { 0.0 } } else { chi2_density(t, df) };
        let mut s = f(0.0) + f(x);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        1.0 - s * h / 3.0
    }

    #[test]
    fn cdf_known_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.96) - 0.9750021).abs() < 1e-6);
        assert!((phi_series(1.96) - 0.9750021048517795).abs() < 1e-13);
    }

    #[test]
    fn cdf_matches_series_oracle() {
        let mut x = -8.0;
        while x <= 8.0 {
            let got = normal_cdf(x);
            let want = phi_series(x);
            assert!((got - want).abs() <= 1e-10, "x={x} got={got} want={want}");
            assert!((normal_cdf(-x) - (1.0 - got)).abs() < 1e-15);
            x += 0.01;
        }
    }

    #[test]
    fn icdf_inverts_cdf() {
        // Lower tail and centre through Φ itself.
        let mut x = -8.0;
        while x <= 5.0 {
            let back = normal_icdf(normal_cdf(x)).unwrap();
            assert!((back - x).abs() <= 1e-8, "x={x} back={back}");
            x += 0.005;
        }
        // Above ~5.5 a probability near 1 cannot carry 1e-8 of x in f64;
        // the upper tail is checked through the survival function.
        let mut x = 5.0;
        while x <= 8.0 {
            let back = -normal_icdf(normal_sf(x)).unwrap();
            assert!((back - x).abs() <= 1e-8, "x={x} back={back}");
            x += 0.005;
        }
    }

    #[test]
    fn icdf_domain() {
        assert!(normal_icdf(0.0).is_err());
        assert!(normal_icdf(1.0).is_err());
        assert!(normal_icdf(f64::NAN).is_err());
        assert_eq!(normal_icdf(0.5).unwrap(), 0.0);
    }

    #[test]
    fn chi2_closed_forms() {
        for df in 1..30 {
            assert_eq!(chi2_sf(0.0, df), 1.0);
        }
        for i in 0..200 {
            let x = i as f64 * 0.37;
            assert!((chi2_sf(x, 2) - (-x / 2.0).exp()).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn chi2_matches_quadrature() {
        let oracle = chi2_sf_simpson(31.410, 20);
        assert!((oracle - 0.05).abs() < 0.001);
        assert!((chi2_sf(31.410, 20) - oracle).abs() < 1e-9);
        for (x, df) in [(3.0, 4), (10.0, 6), (18.3, 10), (40.0, 20)] {
            assert!((chi2_sf(x, df) - chi2_sf_simpson(x, df)).abs() < 1e-9, "x={x} df={df}");
        }
    }
}
