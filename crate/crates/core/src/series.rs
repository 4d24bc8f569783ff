//! Dated series types, simple returns, and period segmentation.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A calendar date. Ordering is chronological.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TradingDate(NaiveDate);

impl TradingDate {
    pub fn from_ymd(year: i32, month: u32, day: u32) -> Result<Self> {
        NaiveDate::from_ymd_opt(year, month, day)
            .map(TradingDate)
            .ok_or_else(|| Error::InvalidInput(format!("invalid calendar date {year:04}-{month:02}-{day:02}")))
    }

    /// Parses with a chrono format string such as `%Y-%m-%d` or `%d/%m/%Y`.
    pub fn parse_with(s: &str, format: &str) -> Result<Self> {
        NaiveDate::parse_from_str(s.trim(), format)
            .map(TradingDate)
            .map_err(|e| Error::InvalidInput(format!("unparseable date '{s}': {e}")))
    }

    pub fn year(&self) -> i32 {
        self.0.year()
    }

    pub fn month(&self) -> u32 {
        self.0.month()
    }

    pub fn day(&self) -> u32 {
        self.0.day()
    }

    pub fn naive(&self) -> NaiveDate {
        self.0
    }

    pub fn weekday(&self) -> chrono::Weekday {
        self.0.weekday()
    }

    pub fn succ(&self) -> Self {
        TradingDate(self.0.succ_opt().expect("date overflow"))
    }
}

impl From<NaiveDate> for TradingDate {
    fn from(d: NaiveDate) -> Self {
        TradingDate(d)
    }
}

impl fmt::Display for TradingDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%d"))
    }
}

impl FromStr for TradingDate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with(s, "%Y-%m-%d")
    }
}

impl Serialize for TradingDate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TradingDate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod sealed {
    use super::TradingDate;

    /// Parallel date and value vectors behind every dated series.
    pub trait DatedParts: Sized {
        fn name(&self) -> &str;
        fn dates(&self) -> &[TradingDate];
        fn values(&self) -> &[f64];
        fn from_parts(name: String, dates: Vec<TradingDate>, values: Vec<f64>) -> Self;
    }
}
use sealed::DatedParts;

/// Daily closing prices for one index.
///
/// Constructed series have strictly increasing dates, positive prices and at
/// least two observations. Sub-series produced by [`segment`] may be shorter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    index_name: String,
    dates: Vec<TradingDate>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(index_name: impl Into<String>, observations: Vec<(TradingDate, f64)>) -> Result<Self> {
        let index_name = index_name.into();
        if observations.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "price series '{index_name}' has {} observation(s); at least 2 are required",
                observations.len()
            )));
        }
        let (dates, prices): (Vec<_>, Vec<_>) = observations.into_iter().unzip();
        check_increasing(&index_name, &dates)?;
        if let Some((i, p)) = prices.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "price series '{index_name}': price {p} at {} is not positive",
                dates[i]
            )));
        }
        Ok(PriceSeries { index_name, dates, prices })
    }

    pub fn index_name(&self) -> &str {
        &self.index_name
    }

    pub fn dates(&self) -> &[TradingDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TradingDate, f64)> + '_ {
        self.dates.iter().copied().zip(self.prices.iter().copied())
    }

    pub fn log_prices(&self) -> Vec<f64> {
        self.prices.iter().map(|p| p.ln()).collect()
    }
}

impl DatedParts for PriceSeries {
    fn name(&self) -> &str {
        &self.index_name
    }
    fn dates(&self) -> &[TradingDate] {
        &self.dates
    }
    fn values(&self) -> &[f64] {
        &self.prices
    }
    fn from_parts(index_name: String, dates: Vec<TradingDate>, prices: Vec<f64>) -> Self {
        PriceSeries { index_name, dates, prices }
    }
}

/// Simple daily returns, each dated at the later of its two prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    index_name: String,
    dates: Vec<TradingDate>,
    returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(index_name: impl Into<String>, observations: Vec<(TradingDate, f64)>) -> Result<Self> {
        let index_name = index_name.into();
        let (dates, returns): (Vec<_>, Vec<_>) = observations.into_iter().unzip();
        check_increasing(&index_name, &dates)?;
        if let Some(r) = returns.iter().find(|r| !(r.is_finite() && **r > -1.0)) {
            return Err(Error::InvalidInput(format!(
                "return series '{index_name}': return {r} is not greater than -1"
            )));
        }
        Ok(ReturnSeries { index_name, dates, returns })
    }

    pub fn index_name(&self) -> &str {
        &self.index_name
    }

    pub fn dates(&self) -> &[TradingDate] {
        &self.dates
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TradingDate, f64)> + '_ {
        self.dates.iter().copied().zip(self.returns.iter().copied())
    }
}

impl DatedParts for ReturnSeries {
    fn name(&self) -> &str {
        &self.index_name
    }
    fn dates(&self) -> &[TradingDate] {
        &self.dates
    }
    fn values(&self) -> &[f64] {
        &self.returns
    }
    fn from_parts(index_name: String, dates: Vec<TradingDate>, returns: Vec<f64>) -> Self {
        ReturnSeries { index_name, dates, returns }
    }
}

fn check_increasing(name: &str, dates: &[TradingDate]) -> Result<()> {
    match dates.windows(2).find(|w| w[0] >= w[1]) {
        Some(w) => Err(Error::InvalidInput(format!(
            "series '{name}': dates not strictly increasing at {} -> {}",
            w[0], w[1]
        ))),
        None => Ok(()),
    }
}

/// `r_t = (P_t - P_{t-1}) / P_{t-1}`, dated at `P_t`.
pub fn compute_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "cannot compute returns for '{}': {} observation(s), need at least 2",
            prices.index_name,
            prices.len()
        )));
    }
    let returns = prices.prices.windows(2).map(|w| (w[1] - w[0]) / w[0]).collect();
    Ok(ReturnSeries {
        index_name: prices.index_name.clone(),
        dates: prices.dates[1..].to_vec(),
        returns,
    })
}

/// One named, inclusive date interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub label: String,
    pub start: TradingDate,
    pub end: TradingDate,
}

impl Period {
    pub fn new(label: impl Into<String>, start: TradingDate, end: TradingDate) -> Self {
        Period {
            label: label.into(),
            start,
            end,
        }
    }

    pub fn contains(&self, d: TradingDate) -> bool {
        self.start <= d && d <= self.end
    }

    fn covers(&self, other: &Period) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// A date partition: an optional full-sample envelope plus chronologically
/// ordered, non-overlapping sub-periods.
///
/// The envelope, when present, must contain every sub-period. It is the only
/// period allowed to overlap others.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodScheme {
    full: Option<Period>,
    subperiods: Vec<Period>,
}

impl PeriodScheme {
    pub fn new(full: Option<Period>, subperiods: Vec<Period>) -> Result<Self> {
        let all: Vec<&Period> = full.iter().chain(subperiods.iter()).collect();
        if all.is_empty() {
            return Err(Error::Config("period scheme has no periods".into()));
        }
        let mut labels = HashSet::new();
        for p in &all {
            if p.label.trim().is_empty() {
                return Err(Error::Config("period label must not be empty".into()));
            }
            if p.start > p.end {
                return Err(Error::Config(format!(
                    "period '{}' starts ({}) after it ends ({})",
                    p.label, p.start, p.end
                )));
            }
            if !labels.insert(p.label.as_str()) {
                return Err(Error::Config(format!("duplicate period label '{}'", p.label)));
            }
        }
        for w in subperiods.windows(2) {
            if w[0].end >= w[1].start {
                return Err(Error::Config(format!(
                    "periods '{}' and '{}' overlap or are out of order",
                    w[0].label, w[1].label
                )));
            }
        }
        if let Some(f) = &full {
            if let Some(p) = subperiods.iter().find(|p| !f.covers(p)) {
                return Err(Error::Config(format!(
                    "period '{}' lies outside the full-sample period '{}'",
                    p.label, f.label
                )));
            }
        }
        Ok(PeriodScheme { full, subperiods })
    }

    /// Builds a scheme from a flat list. The first entry becomes the
    /// full-sample envelope when there are several entries and it covers all
    /// the others.
    pub fn from_entries(mut entries: Vec<Period>) -> Result<Self> {
        if entries.len() >= 2 && entries[1..].iter().all(|p| entries[0].covers(p)) {
            let full = entries.remove(0);
            Self::new(Some(full), entries)
        } else {
            Self::new(None, entries)
        }
    }

    /// A scheme with exactly one period.
    pub fn single(period: Period) -> Self {
        PeriodScheme {
            full: Some(period),
            subperiods: Vec::new(),
        }
    }

    pub fn full(&self) -> Option<&Period> {
        self.full.as_ref()
    }

    pub fn subperiods(&self) -> &[Period] {
        &self.subperiods
    }

    /// All periods, envelope first.
    pub fn periods(&self) -> impl Iterator<Item = &Period> {
        self.full.iter().chain(self.subperiods.iter())
    }

    pub fn len(&self) -> usize {
        self.subperiods.len() + usize::from(self.full.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parses `label=YYYY-MM-DD..YYYY-MM-DD` entries separated by `,` or `;`,
    /// or the keyword `default`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("default") {
            return Ok(default_scheme());
        }
        let mut entries = Vec::new();
        for item in s.split([',', ';']).map(str::trim).filter(|x| !x.is_empty()) {
            let (label, range) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("scheme entry '{item}' is not label=start..end")))?;
            let (start, end) = range
                .split_once("..")
                .ok_or_else(|| Error::Config(format!("scheme entry '{item}' has no '..' range")))?;
            let parse = |d: &str| {
                d.trim()
                    .parse::<TradingDate>()
                    .map_err(|_| Error::Config(format!("scheme entry '{item}': bad date '{}'", d.trim())))
            };
            entries.push(Period::new(label.trim(), parse(start)?, parse(end)?));
        }
        Self::from_entries(entries)
    }
}

impl fmt::Display for PeriodScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .periods()
            .map(|p| format!("{}={}..{}", p.label, p.start, p.end))
            .collect();
        f.write_str(&parts.join(","))
    }
}

fn ymd(y: i32, m: u32, d: u32) -> TradingDate {
    TradingDate::from_ymd(y, m, d).expect("valid constant date")
}

/// Full sample plus the four crisis-delimited sub-periods, on calendar month
/// edges.
pub fn default_scheme() -> PeriodScheme {
    PeriodScheme {
        full: Some(Period::new("Full", ymd(1996, 1, 1), ymd(2016, 4, 8))),
        subperiods: vec![
            Period::new("I", ymd(1996, 1, 1), ymd(2007, 11, 30)),
            Period::new("II", ymd(2007, 12, 1), ymd(2009, 6, 30)),
            Period::new("III", ymd(2009, 7, 1), ymd(2015, 5, 31)),
            Period::new("IV", ymd(2015, 6, 1), ymd(2016, 4, 8)),
        ],
    }
}

/// Types that [`segment`] can slice.
pub trait Segmentable: DatedParts + Clone {}
impl Segmentable for PriceSeries {}
impl Segmentable for ReturnSeries {}

/// Sub-series per period label, in scheme order.
#[derive(Debug, Clone)]
pub struct Segmented<S> {
    pub parts: Vec<(String, S)>,
    pub warnings: Vec<String>,
}

impl<S> Segmented<S> {
    pub fn get(&self, label: &str) -> Option<&S> {
        self.parts.iter().find(|(l, _)| l == label).map(|(_, s)| s)
    }
}

/// Slices `series` by each period of `scheme`. Observations outside every
/// period are dropped; an empty period yields an empty sub-series and a
/// warning.
pub fn segment<S: Segmentable>(series: &S, scheme: &PeriodScheme) -> Segmented<S> {
    let dates = series.dates();
    let values = series.values();
    let mut parts = Vec::with_capacity(scheme.len());
    let mut warnings = Vec::new();
    for period in scheme.periods() {
        let lo = dates.partition_point(|d| *d < period.start);
        let hi = dates.partition_point(|d| *d <= period.end);
        let hi = hi.max(lo);
        if lo == hi {
            warnings.push(format!(
                "period '{}' ({}..{}) contains no observations of '{}'",
                period.label,
                period.start,
                period.end,
                series.name()
            ));
        }
        let sub = S::from_parts(series.name().to_string(), dates[lo..hi].to_vec(), values[lo..hi].to_vec());
        parts.push((period.label.clone(), sub));
    }
    Segmented { parts, warnings }
}
