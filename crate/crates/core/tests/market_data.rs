use std::io::Write;

use chrono::NaiveDate;
use gts_pricing::market_data::{
    load_prices, log_returns, parse_prices, summary, write_prices, write_returns, PriceSeries,
    Schema,
};
use gts_pricing::GtsError;
use proptest::prelude::*;

fn d(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

fn parse(text: &str) -> gts_pricing::Result<gts_pricing::market_data::LoadReport> {
    parse_prices(text.as_bytes(), &Schema::default())
}

const YAHOO: &str = "\
Date,Open,High,Low,Close,Adj Close,Volume
2024-01-02,100,101,99,100.5,100,1000
2024-01-03,100,102,99,101.5,101,1200
2024-01-04,101,103,100,102.5,102.01,900
";

#[test]
fn three_rows_give_two_returns() {
    let rep = parse(YAHOO).unwrap();
    assert_eq!(rep.dropped, 0);
    assert_eq!(rep.series.close, vec![100.0, 101.0, 102.01]);
    let r = log_returns(&rep.series).unwrap();
    assert_eq!(r.dates, vec![d("2024-01-03"), d("2024-01-04")]);
    assert!((r.returns[0] - 0.995_033_085_316_808_3).abs() < 1e-12);
    assert!((r.returns[1] - 100.0 * (102.01f64 / 101.0).ln()).abs() < 1e-12);
}

#[test]
fn unsorted_rows_are_sorted() {
    let text = "Date,Adj Close\n2024-01-04,3\n2024-01-02,1\n2024-01-03,2\n";
    let rep = parse(text).unwrap();
    assert_eq!(
        rep.series.dates,
        vec![d("2024-01-02"), d("2024-01-03"), d("2024-01-04")]
    );
    assert_eq!(rep.series.close, vec![1.0, 2.0, 3.0]);
}

#[test]
fn empty_and_null_closes_are_dropped_and_counted() {
    let text = "Date,Adj Close\n2024-01-02,1\n2024-01-03,\n2024-01-04,null\n2024-01-05,2\n";
    let rep = parse(text).unwrap();
    assert_eq!(rep.dropped, 2);
    assert_eq!(rep.series.close, vec![1.0, 2.0]);
}

#[test]
fn malformed_rows_report_their_line() {
    let text = "Date,Adj Close\n2024-01-02,1\n2024-01-03,abc\n";
    match parse(text) {
        Err(GtsError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    let bad_date = "Date,Adj Close\n2024-01-02,1\nyesterday,2\n";
    assert!(matches!(parse(bad_date), Err(GtsError::Parse { line: 3, .. })));
    let negative = "Date,Adj Close\n2024-01-02,-1\n";
    assert!(matches!(parse(negative), Err(GtsError::Parse { .. })));
    let dup = "Date,Adj Close\n2024-01-02,1\n2024-01-02,2\n";
    assert!(matches!(parse(dup), Err(GtsError::Parse { .. })));
    let missing = "Date,Close\n2024-01-02,1\n";
    assert!(matches!(parse(missing), Err(GtsError::Parse { line: 1, .. })));
}

#[test]
fn custom_schema() {
    let text = "day,px\n01/02/2024,5\n01/03/2024,6\n";
    let schema = Schema {
        date_column: "day".into(),
        close_column: "px".into(),
    };
    let rep = parse_prices(text.as_bytes(), &schema).unwrap();
    assert_eq!(rep.series.dates[1], d("2024-01-03"));
}

#[test]
fn empty_inputs() {
    assert_eq!(parse("Date,Adj Close\n").unwrap_err(), GtsError::EmptySeries);
    assert_eq!(
        parse("Date,Adj Close\n2024-01-02,\n").unwrap_err(),
        GtsError::EmptySeries
    );
    let one = parse("Date,Adj Close\n2024-01-02,5\n").unwrap();
    assert_eq!(log_returns(&one.series).unwrap_err(), GtsError::EmptySeries);
    assert_eq!(summary(&[], 360.0).unwrap_err(), GtsError::EmptySeries);
}

#[test]
fn constant_prices_have_zero_returns() {
    let s = PriceSeries {
        dates: (2..12).map(|i| d(&format!("2024-01-{i:02}"))).collect(),
        close: vec![42.0; 10],
    };
    let r = log_returns(&s).unwrap();
    assert_eq!(r.returns.len(), 9);
    assert!(r.returns.iter().all(|&y| y == 0.0));
    let sm = summary(&r.returns, 360.0).unwrap();
    assert_eq!((sm.mean, sm.variance, sm.skewness), (0.0, 0.0, 0.0));
    assert_eq!(sm.annualized_volatility, 0.0);
}

#[test]
fn summary_of_symmetric_pair() {
    let sm = summary(&[-1.0, 1.0], 360.0).unwrap();
    assert_eq!(sm.count, 2);
    assert_eq!(sm.mean, 0.0);
    assert_eq!(sm.variance, 2.0);
    assert_eq!(sm.skewness, 0.0);
    assert_eq!(sm.excess_kurtosis, -2.0);
    assert_eq!((sm.min, sm.max), (-1.0, 1.0));
    assert!((sm.annualized_volatility - (720.0f64).sqrt() / 100.0).abs() < 1e-15);
}

#[test]
fn single_observation_summary() {
    let sm = summary(&[0.7], 252.0).unwrap();
    assert_eq!((sm.count, sm.mean, sm.variance), (1, 0.7, 0.0));
}

#[test]
fn summary_against_direct_formulas() {
    let y = [0.3, -1.2, 0.5, 2.0, -0.1, 0.0, 0.4];
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let c: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let m2 = c.iter().map(|v| v * v).sum::<f64>() / n;
    let m3 = c.iter().map(|v| v * v * v).sum::<f64>() / n;
    let m4 = c.iter().map(|v| v * v * v * v).sum::<f64>() / n;
    let sm = summary(&y, 365.0).unwrap();
    assert!((sm.variance - m2 * n / (n - 1.0)).abs() < 1e-14);
    assert!((sm.skewness - m3 / m2.powf(1.5)).abs() < 1e-12);
    assert!((sm.excess_kurtosis - (m4 / (m2 * m2) - 3.0)).abs() < 1e-12);
}

#[test]
fn load_write_load_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.csv");
    std::fs::File::create(&src)
        .unwrap()
        .write_all(YAHOO.as_bytes())
        .unwrap();
    let schema = Schema::default();
    let first = load_prices(&src, &schema).unwrap();
    let out = dir.path().join("out.csv");
    write_prices(&out, &first.series, &schema).unwrap();
    let second = load_prices(&out, &schema).unwrap();
    assert_eq!(first, second);

    let r = log_returns(&first.series).unwrap();
    let rp = dir.path().join("returns.csv");
    write_returns(&rp, &r).unwrap();
    let text = std::fs::read_to_string(&rp).unwrap();
    assert!(text.starts_with("date,return_pct\n2024-01-03,0.99503"));
}

#[test]
fn missing_file_is_io_error() {
    let err = load_prices("/nonexistent/prices.csv", &Schema::default()).unwrap_err();
    assert!(matches!(err, GtsError::Io(_)));
}

/// Runs on a real S&P 500 daily series when `GTS_SP500_CSV` points to one.
#[test]
fn sp500_volatility_when_available() {
    let Ok(path) = std::env::var("GTS_SP500_CSV") else {
        eprintln!("GTS_SP500_CSV not set, skipping");
        return;
    };
    let rep = load_prices(path, &Schema::default()).unwrap();
    let r = log_returns(&rep.series).unwrap();
    let sm = summary(&r.returns, 360.0).unwrap();
    assert!(
        (0.17..=0.22).contains(&sm.annualized_volatility),
        "{}",
        sm.annualized_volatility
    );
}

proptest! {
    #[test]
    fn returns_are_scale_invariant(
        close in prop::collection::vec(1.0f64..1e4, 2..40),
        c in 1e-3f64..1e3,
    ) {
        let dates: Vec<NaiveDate> = (0..close.len())
            .map(|i| d("2020-01-01") + chrono::Days::new(i as u64))
            .collect();
        let a = log_returns(&PriceSeries { dates: dates.clone(), close: close.clone() }).unwrap();
        let b = log_returns(&PriceSeries { dates, close: close.iter().map(|p| p * c).collect() }).unwrap();
        prop_assert_eq!(a.returns.len(), close.len() - 1);
        for (x, y) in a.returns.iter().zip(&b.returns) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let total: f64 = a.returns.iter().sum();
        let direct = 100.0 * (close[close.len() - 1] / close[0]).ln();
        prop_assert!((total - direct).abs() < 1e-9);
    }
}
