//! Weak-form market efficiency test battery for daily equity-index series.
//!
//! The crate covers the whole pipeline: CSV ingest, simple daily returns,
//! period segmentation, descriptive moments and Jarque-Bera, runs tests,
//! autocorrelation with Ljung-Box, the augmented Dickey-Fuller unit-root
//! test, Hodrick-Prescott smoothing, cross-market alignment and correlation,
//! a seeded Monte-Carlo size/power harness, and report/plot rendering.

// `!(x > 0.0)` is the NaN-rejecting form used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cross;
pub mod error;
pub mod hp;
pub mod ingest;
pub mod randomness;
pub mod report;
pub mod series;
pub mod sim;
pub mod stats;
pub mod unitroot;

pub use error::{Error, Result};
pub use series::{compute_returns, default_scheme, segment, PeriodScheme, PriceSeries, ReturnSeries, TradingDate};
