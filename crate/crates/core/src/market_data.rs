//! Price-series ingestion and percent log returns.

use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{GtsError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub date_column: String,
    pub close_column: String,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            date_column: "Date".into(),
            close_column: "Adj Close".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub close: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadReport {
    pub series: PriceSeries,
    /// Rows skipped for a missing close.
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    /// Log returns in percent.
    pub returns: Vec<f64>,
}

const DATE_FORMATS: [&str; 3] = ["%Y-%m-%d", "%m/%d/%Y", "%Y/%m/%d"];

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    let s = s.trim();
    DATE_FORMATS
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(s, f).ok())
        .ok_or_else(|| GtsError::Parse {
            line,
            message: format!("unrecognized date {s:?}"),
        })
}

fn csv_error(e: csv::Error) -> GtsError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => GtsError::Io(io.to_string()),
        other => GtsError::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

pub fn load_prices(path: impl AsRef<Path>, schema: &Schema) -> Result<LoadReport> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| GtsError::Io(format!("{}: {e}", path.display())))?;
    parse_prices(file, schema)
}

/// Parses a price CSV, sorts it by date and drops rows whose close is
/// empty or `null`.
pub fn parse_prices<R: Read>(reader: R, schema: &Schema) -> Result<LoadReport> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| GtsError::Parse {
            line: 1,
            message: format!("missing column {name:?}"),
        })
    };
    let (di, ci) = (col(&schema.date_column)?, col(&schema.close_column)?);
    let mut rows = Vec::new();
    let mut dropped = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let date = parse_date(rec.get(di).unwrap_or(""), line)?;
        let raw = rec.get(ci).unwrap_or("");
        if raw.is_empty() || raw.eq_ignore_ascii_case("null") {
            dropped += 1;
            continue;
        }
        let close: f64 = raw.parse().map_err(|_| GtsError::Parse {
            line,
            message: format!("close {raw:?} is not a number"),
        })?;
        if !(close > 0.0 && close.is_finite()) {
            return Err(GtsError::Parse {
                line,
                message: format!("close {close} must be positive"),
            });
        }
        rows.push((date, close, line));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(GtsError::Parse {
            line: w[1].2,
            message: format!("duplicate date {}", w[1].0),
        });
    }
    if rows.is_empty() {
        return Err(GtsError::EmptySeries);
    }
    Ok(LoadReport {
        series: PriceSeries {
            dates: rows.iter().map(|r| r.0).collect(),
            close: rows.iter().map(|r| r.1).collect(),
        },
        dropped,
    })
}

pub fn write_prices(path: impl AsRef<Path>, series: &PriceSeries, schema: &Schema) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record([&schema.date_column, &schema.close_column])
        .map_err(csv_error)?;
    for (d, c) in series.dates.iter().zip(&series.close) {
        w.write_record([d.format("%Y-%m-%d").to_string(), format!("{c:?}")])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// yᵢ = 100·ln(Pᵢ/Pᵢ₋₁), dated at the later observation.
pub fn log_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    if prices.close.len() < 2 || prices.dates.len() != prices.close.len() {
        return Err(GtsError::EmptySeries);
    }
    Ok(ReturnSeries {
        dates: prices.dates[1..].to_vec(),
        returns: prices
            .close
            .windows(2)
            .map(|w| 100.0 * (w[1] / w[0]).ln())
            .collect(),
    })
}

pub fn write_returns(path: impl AsRef<Path>, series: &ReturnSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(["date", "return_pct"]).map_err(csv_error)?;
    for (d, r) in series.dates.iter().zip(&series.returns) {
        w.write_record([d.format("%Y-%m-%d").to_string(), format!("{r:?}")])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance; 0 for a single observation.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub min: f64,
    pub max: f64,
    /// √(D·variance)/100.
    pub annualized_volatility: f64,
}

pub fn summary(returns: &[f64], days_per_year: f64) -> Result<Summary> {
    if returns.is_empty() {
        return Err(GtsError::EmptySeries);
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let m = |p: i32| returns.iter().map(|y| (y - mean).powi(p)).sum::<f64>() / n;
    let (m2, m3, m4) = (m(2), m(3), m(4));
    let variance = if returns.len() > 1 { m2 * n / (n - 1.0) } else { 0.0 };
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(Summary {
        count: returns.len(),
        mean,
        variance,
        skewness,
        excess_kurtosis,
        min: returns.iter().copied().fold(f64::INFINITY, f64::min),
        max: returns.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        annualized_volatility: (days_per_year * variance).sqrt() / 100.0,
    })
}
