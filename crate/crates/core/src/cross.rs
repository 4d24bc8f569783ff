//! Calendar alignment of two markets and product-moment correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{PriceSeries, TradingDate};

/// Two price series on a shared calendar. A market closed on a date where
/// the other traded carries its last close forward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedPair {
    pub a_name: String,
    pub b_name: String,
    pub dates: Vec<TradingDate>,
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    pub fill_count_a: usize,
    pub fill_count_b: usize,
}

impl AlignedPair {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// The aligned legs as standalone price series.
    pub fn to_series(&self) -> Result<(PriceSeries, PriceSeries)> {
        let a = PriceSeries::new(self.a_name.clone(), self.dates.iter().copied().zip(self.a_values.iter().copied()).collect())?;
        let b = PriceSeries::new(self.b_name.clone(), self.dates.iter().copied().zip(self.b_values.iter().copied()).collect())?;
        Ok((a, b))
    }
}

/// Union calendar over the overlap of the two date ranges, forward-filling
/// whichever market did not trade.
pub fn align(a: &PriceSeries, b: &PriceSeries) -> Result<AlignedPair> {
    let (ad, bd) = (a.dates(), b.dates());
    let (Some(a_first), Some(b_first), Some(a_last), Some(b_last)) = (ad.first(), bd.first(), ad.last(), bd.last())
    else {
        return Err(Error::Alignment("cannot align an empty series".into()));
    };
    let start = *a_first.max(b_first);
    let end = *a_last.min(b_last);
    if start > end {
        return Err(Error::Alignment(format!(
            "'{}' ({}..{}) and '{}' ({}..{}) do not overlap",
            a.index_name(),
            a_first,
            a_last,
            b.index_name(),
            b_first,
            b_last
        )));
    }

    let mut out = AlignedPair {
        a_name: a.index_name().to_string(),
        b_name: b.index_name().to_string(),
        dates: Vec::new(),
        a_values: Vec::new(),
        b_values: Vec::new(),
        fill_count_a: 0,
        fill_count_b: 0,
    };
    // Cursors point at the next unconsumed observation of each market.
    let mut i = ad.partition_point(|d| *d < start);
    let mut j = bd.partition_point(|d| *d < start);
    let mut last_a = i.checked_sub(1).map(|k| a.prices()[k]);
    let mut last_b = j.checked_sub(1).map(|k| b.prices()[k]);

    loop {
        let next_a = ad.get(i).copied().filter(|d| *d <= end);
        let next_b = bd.get(j).copied().filter(|d| *d <= end);
        let date = match (next_a, next_b) {
            (None, None) => break,
            (Some(x), None) => x,
            (None, Some(y)) => y,
            (Some(x), Some(y)) => x.min(y),
        };
        let (va, filled_a) = if next_a == Some(date) {
            let v = a.prices()[i];
            i += 1;
            last_a = Some(v);
            (v, false)
        } else {
            (last_a.expect("a has traded at or before the overlap start"), true)
        };
        let (vb, filled_b) = if next_b == Some(date) {
            let v = b.prices()[j];
            j += 1;
            last_b = Some(v);
            (v, false)
        } else {
            (last_b.expect("b has traded at or before the overlap start"), true)
        };
        out.dates.push(date);
        out.a_values.push(va);
        out.b_values.push(vb);
        out.fill_count_a += usize::from(filled_a);
        out.fill_count_b += usize::from(filled_b);
    }
    Ok(out)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "correlation needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData {
            what: "correlation".into(),
            needed: 3,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance("correlation with a constant series".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::compute_returns;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> TradingDate {
        TradingDate::from_ymd(y, m, day).unwrap()
    }

    fn series(name: &str, obs: &[(TradingDate, f64)]) -> PriceSeries {
        PriceSeries::new(name, obs.to_vec()).unwrap()
    }

    #[test]
    fn identical_calendars() {
        let a = series("A", &[(d(2020, 1, 6), 1.0), (d(2020, 1, 7), 2.0), (d(2020, 1, 8), 3.0)]);
        let b = series("B", &[(d(2020, 1, 6), 5.0), (d(2020, 1, 7), 4.0), (d(2020, 1, 8), 6.0)]);
        let p = align(&a, &b).unwrap();
        assert_eq!(p.a_values, a.prices());
        assert_eq!(p.b_values, b.prices());
        assert_eq!((p.fill_count_a, p.fill_count_b), (0, 0));
    }

    #[test]
    fn wednesday_gap_forward_filled() {
        // 2020-01-06 is a Monday.
        let week: Vec<TradingDate> = (6..=10).map(|day| d(2020, 1, day)).collect();
        let a = series("A", &week.iter().map(|&dt| (dt, 100.0)).collect::<Vec<_>>());
        let b_obs: Vec<_> = week
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 2)
            .map(|(i, &dt)| (dt, 50.0 + i as f64))
            .collect();
        let b = series("B", &b_obs);
        let p = align(&a, &b).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p.b_values[2], 51.0);
        assert_eq!((p.fill_count_a, p.fill_count_b), (0, 1));

        // filled date carries a zero return
        let (_, bs) = p.to_series().unwrap();
        let r = compute_returns(&bs).unwrap();
        assert_eq!(r.returns()[1], 0.0);
    }

    #[test]
    fn disjoint_ranges() {
        let a = series("A", &[(d(2020, 1, 6), 1.0), (d(2020, 1, 7), 2.0)]);
        let b = series("B", &[(d(2021, 1, 6), 1.0), (d(2021, 1, 7), 2.0)]);
        assert!(matches!(align(&a, &b), Err(Error::Alignment(_))));
    }

    #[test]
    fn overlap_trims_and_uses_prior_close() {
        let a = series("A", &[(d(2020, 1, 1), 1.0), (d(2020, 1, 3), 3.0), (d(2020, 1, 9), 9.0)]);
        let b = series("B", &[(d(2020, 1, 2), 20.0), (d(2020, 1, 3), 30.0), (d(2020, 1, 5), 50.0)]);
        let p = align(&a, &b).unwrap();
        assert_eq!(p.dates, vec![d(2020, 1, 2), d(2020, 1, 3), d(2020, 1, 5)]);
        assert_eq!(p.a_values, vec![1.0, 3.0, 3.0]);
        assert_eq!(p.b_values, vec![20.0, 30.0, 50.0]);
        assert_eq!((p.fill_count_a, p.fill_count_b), (2, 0));
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.5];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap() - 0.98198).abs() < 1e-5);
        assert!(matches!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::ZeroVariance(_))));
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    fn calendar_strategy() -> impl Strategy<Value = (Vec<bool>, Vec<bool>, Vec<f64>)> {
        (20usize..120).prop_flat_map(|n| {
            (
                prop::collection::vec(prop::bool::weighted(0.85), n),
                prop::collection::vec(prop::bool::weighted(0.85), n),
                prop::collection::vec(1.0f64..100.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn align_idempotent((ta, tb, px) in calendar_strategy()) {
            let start = d(2001, 1, 1);
            let mut date = start;
            let (mut oa, mut ob) = (Vec::new(), Vec::new());
            for i in 0..px.len() {
                if ta[i] { oa.push((date, px[i])); }
                if tb[i] { ob.push((date, px[i] * 2.0)); }
                date = date.succ();
            }
            prop_assume!(oa.len() >= 2 && ob.len() >= 2);
            let (a, b) = (series("A", &oa), series("B", &ob));
            let Ok(p) = align(&a, &b) else { return Ok(()); };
            prop_assert!(p.dates.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(p.fill_count_a <= p.len() && p.fill_count_b <= p.len());
            if p.len() >= 2 {
                let (ra, rb) = p.to_series().unwrap();
                let again = align(&ra, &rb).unwrap();
                prop_assert_eq!(&again.dates, &p.dates);
                prop_assert_eq!(&again.a_values, &p.a_values);
                prop_assert_eq!(&again.b_values, &p.b_values);
                prop_assert_eq!((again.fill_count_a, again.fill_count_b), (0, 0));
            }
        }

        #[test]
        fn pearson_affine_invariant(x in prop::collection::vec(-10.0f64..10.0, 5..50),
                                    y_noise in prop::collection::vec(-10.0f64..10.0, 50),
                                    a in 0.1f64..10.0, c in -5.0f64..5.0) {
            let y: Vec<f64> = x.iter().zip(&y_noise).map(|(u, v)| u + v).collect();
            let Ok(base) = pearson(&x, &y) else { return Ok(()); };
            let xs: Vec<f64> = x.iter().map(|v| a * v + c).collect();
            let ys: Vec<f64> = y.iter().map(|v| a * 0.5 * v - c).collect();
            prop_assert!((pearson(&xs, &y).unwrap() - base).abs() < 1e-12);
            prop_assert!((pearson(&x, &ys).unwrap() - base).abs() < 1e-12);
        }
    }
}
