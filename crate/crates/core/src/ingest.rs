//! Quote-provider CSV export parsing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{PriceSeries, TradingDate};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub date_column: String,
    pub price_column: String,
    /// Used when `price_column` is absent from the header.
    pub price_fallback: Option<String>,
    /// chrono format string, e.g. `%Y-%m-%d` or `%d/%m/%Y`.
    pub date_format: String,
    pub decimal_separator: char,
    pub delimiter: char,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            date_column: "Date".into(),
            price_column: "Adj Close".into(),
            price_fallback: Some("Close".into()),
            date_format: "%Y-%m-%d".into(),
            decimal_separator: '.',
            delimiter: ',',
        }
    }
}

impl CsvSchema {
    pub fn validate(&self) -> Result<()> {
        if self.date_column.trim().is_empty() || self.price_column.trim().is_empty() {
            return Err(Error::Schema("column names must not be empty".into()));
        }
        if self.date_column == self.price_column || self.price_fallback.as_deref() == Some(self.date_column.as_str()) {
            return Err(Error::Schema("date and price columns must differ".into()));
        }
        if !matches!(self.decimal_separator, '.' | ',') {
            return Err(Error::Schema(format!(
                "decimal separator must be '.' or ',', got '{}'",
                self.decimal_separator
            )));
        }
        if self.decimal_separator == self.delimiter || !self.delimiter.is_ascii() {
            return Err(Error::Schema("field delimiter must be ASCII and differ from the decimal separator".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_dropped: usize,
    /// (file line number, reason)
    pub drop_reasons: Vec<(usize, String)>,
    pub date_range: Option<(TradingDate, TradingDate)>,
    /// True when the file's rows were not in ascending date order.
    pub reordered: bool,
    pub price_column_used: String,
}

fn parse_price(raw: &str, decimal: char) -> std::result::Result<f64, &'static str> {
    let s = raw.trim();
    if s.is_empty() {
        return Err("missing price");
    }
    let normalized = if decimal == ',' {
        if s.contains('.') {
            return Err("non-numeric price");
        }
        s.replace(',', ".")
    } else {
        s.to_string()
    };
    // Rejects thousands separators, "null", "NaN", "inf" and the like.
    if !normalized
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
    {
        return Err("non-numeric price");
    }
    let v: f64 = normalized.parse().map_err(|_| "non-numeric price")?;
    if !v.is_finite() {
        return Err("non-numeric price");
    }
    if v <= 0.0 {
        return Err("non-positive price");
    }
    Ok(v)
}

/// Parses a CSV export into a sorted price series.
///
/// Bad rows are dropped and logged. Duplicate dates keep the last occurrence.
pub fn parse_price_csv(content: &[u8], schema: &CsvSchema, index_name: &str) -> Result<(PriceSeries, IngestReport)> {
    schema.validate()?;
    let text = std::str::from_utf8(content)
        .map_err(|e| Error::InvalidInput(format!("'{index_name}': input is not UTF-8: {e}")))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidInput(format!("'{index_name}': cannot read header: {e}")))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let date_idx = find(&schema.date_column)
        .ok_or_else(|| Error::Schema(format!("'{index_name}': missing date column '{}'", schema.date_column)))?;
    let (price_idx, price_column_used) = match find(&schema.price_column) {
        Some(i) => (i, schema.price_column.clone()),
        None => match schema.price_fallback.as_deref().and_then(|f| find(f).map(|i| (i, f.to_string()))) {
            Some(found) => found,
            None => {
                return Err(Error::Schema(format!(
                    "'{index_name}': missing price column '{}'{}",
                    schema.price_column,
                    schema
                        .price_fallback
                        .as_deref()
                        .map(|f| format!(" (and fallback '{f}')"))
                        .unwrap_or_default()
                )))
            }
        },
    };

    let mut rows_read = 0;
    let mut drop_reasons = Vec::new();
    // date -> (line, price), keeping the latest row for each date
    let mut by_date: BTreeMap<TradingDate, (usize, f64)> = BTreeMap::new();
    let mut previous: Option<TradingDate> = None;
    let mut reordered = false;
    for record in reader.records() {
        rows_read += 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = rows_read + 1;
                drop_reasons.push((line, format!("malformed row: {e}")));
                continue;
            }
        };
        // header is line 1; records never span lines in provider exports
        let line = rows_read + 1;
        let date = match record.get(date_idx).map(|s| TradingDate::parse_with(s, &schema.date_format)) {
            Some(Ok(d)) => d,
            _ => {
                drop_reasons.push((line, "unparseable date".into()));
                continue;
            }
        };
        let price = match record.get(price_idx).map(|s| parse_price(s, schema.decimal_separator)) {
            Some(Ok(p)) => p,
            Some(Err(reason)) => {
                drop_reasons.push((line, reason.into()));
                continue;
            }
            None => {
                drop_reasons.push((line, "missing price".into()));
                continue;
            }
        };
        if previous.is_some_and(|p| date < p) {
            reordered = true;
        }
        previous = Some(date);
        if let Some((old_line, _)) = by_date.insert(date, (line, price)) {
            drop_reasons.push((old_line, format!("duplicate date {date} (superseded by line {line})")));
        }
    }
    drop_reasons.sort_by_key(|(line, _)| *line);

    if by_date.is_empty() {
        return Err(Error::EmptyInput(format!("'{index_name}': no valid price rows")));
    }
    let observations: Vec<(TradingDate, f64)> = by_date.into_iter().map(|(d, (_, p))| (d, p)).collect();
    let date_range = Some((observations[0].0, observations[observations.len() - 1].0));
    let series = PriceSeries::new(index_name, observations)?;
    let report = IngestReport {
        rows_read,
        rows_dropped: drop_reasons.len(),
        drop_reasons,
        date_range,
        reordered,
        price_column_used,
    };
    debug_assert_eq!(report.rows_read, report.rows_dropped + series.len());
    Ok((series, report))
}

/// Writes `Date,Adj Close` CSV that [`parse_price_csv`] reads back exactly
/// under the default schema.
pub fn write_price_csv(series: &PriceSeries) -> String {
    let mut out = String::from("Date,Adj Close\n");
    for (d, p) in series.iter() {
        out.push_str(&format!("{d},{p}\n"));
    }
    out
}
