//! Seeded synthetic two-market dataset for end-to-end runs.

use std::path::Path;

use chrono::Weekday;

use crate::error::{Error, Result};
use crate::ingest::write_price_csv;
use crate::series::{default_scheme, PriceSeries, TradingDate};
use crate::sim::{splitmix64, NormalStream};

use super::ensure_dir;

pub const FIXTURE_A: &str = "SYN-A";
pub const FIXTURE_B: &str = "SYN-B";
pub const FIXTURE_CONFIG: &str = "fixture.conf";

/// Probability that a market is closed on a given business day.
const HOLIDAY_RATE: f64 = 0.025;

struct MarketParams {
    name: &'static str,
    start_price: f64,
    drift: f64,
    phi: f64,
    /// Daily volatility for each default sub-period.
    vols: [f64; 4],
}

const MARKETS: [MarketParams; 2] = [
    MarketParams {
        name: FIXTURE_A,
        start_price: 550.0,
        drift: 4e-4,
        phi: 0.04,
        vols: [0.016, 0.025, 0.013, 0.027],
    },
    MarketParams {
        name: FIXTURE_B,
        start_price: 120.0,
        drift: 5e-4,
        phi: 0.08,
        vols: [0.016, 0.027, 0.011, 0.011],
    },
];

fn business_days() -> Vec<TradingDate> {
    let scheme = default_scheme();
    let full = scheme.full().expect("default scheme has an envelope");
    let mut out = Vec::new();
    let mut d = full.start;
    while d <= full.end {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ();
    }
    out
}

fn simulate(params: &MarketParams, seed: u64) -> Result<PriceSeries> {
    let scheme = default_scheme();
    let subperiods = scheme.subperiods();
    let mut shocks = NormalStream::new(seed);
    let mut holidays = NormalStream::new(splitmix64(seed));
    let mut price = params.start_price;
    let mut prev_r = 0.0;
    let mut obs = Vec::new();
    for (i, d) in business_days().into_iter().enumerate() {
        let closed = holidays.next_uniform() < HOLIDAY_RATE;
        if i > 0 && closed {
            continue;
        }
        if !obs.is_empty() {
            let regime = subperiods.iter().position(|p| p.contains(d)).unwrap_or(0);
            let r = params.drift + params.phi * prev_r + params.vols[regime] * shocks.next_normal();
            price *= 1.0 + r.max(-0.5);
            prev_r = r;
        }
        // four decimals, as provider exports print
        let rounded = (price * 1e4).round() / 1e4;
        obs.push((d, rounded));
    }
    PriceSeries::new(params.name, obs)
}

/// The two fixture markets for `seed`.
pub fn fixture_series(seed: u64) -> Result<(PriceSeries, PriceSeries)> {
    let a = simulate(&MARKETS[0], splitmix64(seed ^ 0xA))?;
    let b = simulate(&MARKETS[1], splitmix64(seed ^ 0xB))?;
    Ok((a, b))
}

/// Writes `market_a.csv`, `market_b.csv` and a config into `dir`; returns
/// the file names.
pub fn write_fixture(dir: &Path, seed: u64) -> Result<Vec<String>> {
    ensure_dir(dir)?;
    let (a, b) = fixture_series(seed)?;
    // market B exports only a `Close` column, exercising the fallback
    let b_csv = write_price_csv(&b).replacen("Date,Adj Close\n", "Date,Close\n", 1);
    let config = format!(
        "# synthetic two-market fixture (seed {seed})\n\
         scheme = default\n\
         acf_mode = paper_table\n\
         adf_model = drift_trend\n\
         adf_target = returns\n\
         hp_lambda = daily\n\
         formats = markdown,csv,json\n\
         plots = true\n\
         output_dir = out\n\
         seed = {seed}\n\
         \n\
         [input.1]\n\
         path = market_a.csv\n\
         index_name = {FIXTURE_A}\n\
         \n\
         [input.2]\n\
         path = market_b.csv\n\
         index_name = {FIXTURE_B}\n"
    );
    let files = [
        ("market_a.csv", write_price_csv(&a)),
        ("market_b.csv", b_csv),
        (FIXTURE_CONFIG, config),
    ];
    let mut names = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::Io(e).context(format!("writing '{}'", path.display())))?;
        names.push(name.to_string());
    }
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cross::align;

    #[test]
    fn calendars_differ_and_are_seeded() {
        let (a, b) = fixture_series(7).unwrap();
        let (a2, _) = fixture_series(7).unwrap();
        assert_eq!(a, a2);
        assert_ne!(a.dates(), b.dates());
        let days = business_days().len();
        assert!(a.len() < days && a.len() > days * 95 / 100);
        let pair = align(&a, &b).unwrap();
        assert!(pair.fill_count_a > 0 && pair.fill_count_b > 0);
    }
}
