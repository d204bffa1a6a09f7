//! Daily adjusted-close prices, simple returns and per-ticker moments.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use log::{debug, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::period::DateRange;
use crate::stats;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed price CSV {path}: {message}")]
    Csv { path: String, message: String },
    #[error("{ticker}: insufficient observations ({usable} usable prices)")]
    InsufficientObservations { ticker: String, usable: usize },
    #[error("{ticker}: moments need at least 4 returns, got {n}")]
    TooFewReturns { ticker: String, n: usize },
    #[error("cross-section summary needs at least one ticker")]
    EmptyCrossSection,
}

/// Adjusted-close prices with the simple daily returns between consecutive
/// observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries<T> {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub adj_close: Vec<T>,
    /// `returns[t] = adj_close[t + 1] / adj_close[t] - 1`.
    pub returns: Vec<T>,
}

impl<T: Scalar> ReturnSeries<T> {
    /// Builds a series from `(date, price)` pairs. Non-positive or non-finite
    /// prices are dropped with a warning; duplicate dates keep the last row.
    pub fn from_prices(
        ticker: &str,
        mut rows: Vec<(NaiveDate, T)>,
    ) -> Result<Self, MarketError> {
        let before = rows.len();
        rows.retain(|(d, p)| {
            let ok = p.is_finite() && *p > T::zero();
            if !ok {
                debug!("{ticker}: dropping unusable price {p} on {d}");
            }
            ok
        });
        let dropped = before - rows.len();
        if dropped > 0 {
            warn!("{ticker}: dropped {dropped} rows with missing or non-positive Adj Close");
        }
        rows.sort_by_key(|(d, _)| *d);
        rows.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                warn!("{ticker}: duplicate date {}, keeping last row", later.0);
                *earlier = *later;
                true
            } else {
                false
            }
        });
        if rows.len() < 2 {
            return Err(MarketError::InsufficientObservations {
                ticker: ticker.to_string(),
                usable: rows.len(),
            });
        }
        let (dates, adj_close): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        let returns = adj_close.windows(2).map(|w| w[1] / w[0] - T::one()).collect();
        Ok(Self {
            ticker: ticker.to_string(),
            dates,
            adj_close,
            returns,
        })
    }

    /// Restricts to prices dated inside `window`; returns are recomputed over
    /// the consecutive observations that remain.
    pub fn window(&self, window: &DateRange) -> Result<Self, MarketError> {
        let rows = self
            .dates
            .iter()
            .zip(&self.adj_close)
            .filter(|(d, _)| window.contains(**d))
            .map(|(&d, &p)| (d, p))
            .collect();
        Self::from_prices(&self.ticker, rows)
    }
}

/// Parses a Yahoo-style CSV (`Date,...,Adj Close,...`). Only `Date` and
/// `Adj Close` are read; unparseable prices such as `null` count as missing.
pub fn parse_prices<T: Scalar, R: Read>(
    reader: R,
    ticker: &str,
    source_name: &str,
) -> Result<ReturnSeries<T>, MarketError> {
    let csv_err = |message: String| MarketError::Csv {
        path: source_name.to_string(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let date_idx = find("Date").ok_or_else(|| csv_err("missing 'Date' column".into()))?;
    let adj_idx = find("Adj Close").ok_or_else(|| csv_err("missing 'Adj Close' column".into()))?;

    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(e.to_string()))?;
        let date_str = rec.get(date_idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d")
            .map_err(|e| csv_err(format!("row {}: bad date '{date_str}': {e}", line + 2)))?;
        let price = rec
            .get(adj_idx)
            .and_then(|s| s.parse::<f64>().ok())
            .map(T::lit)
            .unwrap_or_else(T::nan);
        rows.push((date, price));
    }
    ReturnSeries::from_prices(ticker, rows)
}

pub fn load_prices<T: Scalar>(csv_path: &Path, ticker: &str) -> Result<ReturnSeries<T>, MarketError> {
    let path = csv_path.display().to_string();
    let file = File::open(csv_path).map_err(|source| MarketError::Io {
        path: path.clone(),
        source,
    })?;
    parse_prices(file, ticker, &path)
}

/// Mean, sample standard deviation, bias-adjusted skewness and bias-adjusted
/// excess kurtosis of daily returns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentStats<T> {
    pub ticker: String,
    pub mean: T,
    pub std: T,
    /// `None` when the returns have zero variance.
    pub skewness: Option<T>,
    /// Excess (Fisher) kurtosis; `None` when the returns have zero variance.
    pub kurtosis: Option<T>,
    pub n_obs: usize,
}

pub fn moments<T: Scalar>(series: &ReturnSeries<T>) -> Result<MomentStats<T>, MarketError> {
    moments_of(&series.ticker, &series.returns)
}

pub fn moments_of<T: Scalar>(ticker: &str, returns: &[T]) -> Result<MomentStats<T>, MarketError> {
    let n = returns.len();
    if n < 4 {
        return Err(MarketError::TooFewReturns {
            ticker: ticker.to_string(),
            n,
        });
    }
    let nf = T::from_usize_lossy(n);
    let mean = stats::mean(returns);
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &r in returns {
        let d = r - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let std = (m2 / (nf - T::one())).sqrt();
    if m2 == T::zero() || stats::is_constant(returns) {
        return Ok(MomentStats {
            ticker: ticker.to_string(),
            mean,
            std: T::zero(),
            skewness: None,
            kurtosis: None,
            n_obs: n,
        });
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let g1 = m3 / m2.powf(T::lit(1.5));
    let g2 = m4 / (m2 * m2) - three;
    let skew = (nf * (nf - one)).sqrt() / (nf - two) * g1;
    let kurt = (nf - one) / ((nf - two) * (nf - three)) * ((nf + one) * g2 + T::lit(6.0));
    Ok(MomentStats {
        ticker: ticker.to_string(),
        mean,
        std,
        skewness: Some(skew),
        kurtosis: Some(kurt),
        n_obs: n,
    })
}

/// Plug-in (biased) excess kurtosis `m4 / m2^2 - 3`; `None` for zero variance.
pub fn population_excess_kurtosis<T: Scalar>(returns: &[T]) -> Option<T> {
    let n = T::from_usize_lossy(returns.len());
    let mean = stats::mean(returns);
    let (mut m2, mut m4) = (T::zero(), T::zero());
    for &r in returns {
        let d = r - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    if m2 == T::zero() {
        return None;
    }
    m2 /= n;
    m4 /= n;
    Some(m4 / (m2 * m2) - T::lit(3.0))
}

/// Percentile levels reported in the cross-section summary, in percent.
pub const SUMMARY_PERCENTILES: [u32; 11] = [1, 3, 5, 10, 25, 50, 75, 90, 95, 97, 99];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Moment {
    Mean,
    Std,
    Skewness,
    Kurtosis,
}

impl Moment {
    pub const ALL: [Moment; 4] = [Moment::Mean, Moment::Std, Moment::Skewness, Moment::Kurtosis];

    pub fn label(self) -> &'static str {
        match self {
            Moment::Mean => "E[R]",
            Moment::Std => "Std[R]",
            Moment::Skewness => "Skewness[R]",
            Moment::Kurtosis => "Kurtosis[R]",
        }
    }

    pub fn short_label(self) -> &'static str {
        match self {
            Moment::Mean => "E[R]",
            Moment::Std => "Std[R]",
            Moment::Skewness => "Skew[R]",
            Moment::Kurtosis => "Kurt[R]",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Moment::Mean => "mean",
            Moment::Std => "std",
            Moment::Skewness => "skewness",
            Moment::Kurtosis => "kurtosis",
        }
    }

    pub fn of<T: Scalar>(self, m: &MomentStats<T>) -> Option<T> {
        match self {
            Moment::Mean => Some(m.mean),
            Moment::Std => Some(m.std),
            Moment::Skewness => m.skewness,
            Moment::Kurtosis => m.kurtosis,
        }
    }
}

/// One column of the cross-sectional summary table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary<T> {
    pub moment: Moment,
    pub count: usize,
    pub mean: T,
    /// Sample standard deviation across tickers; NaN for a single ticker.
    pub std: T,
    pub min: T,
    /// Values at [`SUMMARY_PERCENTILES`].
    pub percentiles: Vec<T>,
    pub max: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionSummary<T> {
    pub columns: Vec<ColumnSummary<T>>,
}

impl<T: Scalar> CrossSectionSummary<T> {
    /// Row labels in display order: `Count, Mean, Std, Min, 1%, ..., 99%, max`.
    pub fn row_labels() -> Vec<String> {
        let mut labels: Vec<String> = ["Count", "Mean", "Std", "Min"].iter().map(|s| s.to_string()).collect();
        labels.extend(SUMMARY_PERCENTILES.iter().map(|p| format!("{p}%")));
        labels.push("max".into());
        labels
    }
}

/// Distribution of each moment across tickers. Undefined skewness or kurtosis
/// values are left out of their column, so counts may differ.
pub fn cross_section_summary<T: Scalar>(
    stats_list: &[MomentStats<T>],
) -> Result<CrossSectionSummary<T>, MarketError> {
    if stats_list.is_empty() {
        return Err(MarketError::EmptyCrossSection);
    }
    let columns = Moment::ALL
        .iter()
        .map(|&moment| {
            let mut values: Vec<T> = stats_list.iter().filter_map(|s| moment.of(s)).collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            summarize(moment, &values)
        })
        .collect();
    Ok(CrossSectionSummary { columns })
}

fn summarize<T: Scalar>(moment: Moment, sorted: &[T]) -> ColumnSummary<T> {
    if sorted.is_empty() {
        return ColumnSummary {
            moment,
            count: 0,
            mean: T::nan(),
            std: T::nan(),
            min: T::nan(),
            percentiles: vec![T::nan(); SUMMARY_PERCENTILES.len()],
            max: T::nan(),
        };
    }
    ColumnSummary {
        moment,
        count: sorted.len(),
        mean: stats::mean(sorted),
        std: stats::sample_variance(sorted).sqrt(),
        min: sorted[0],
        percentiles: SUMMARY_PERCENTILES
            .iter()
            .map(|&p| stats::percentile_sorted(sorted, T::from_u32(p).unwrap() / T::lit(100.0)))
            .collect(),
        max: sorted[sorted.len() - 1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, day).unwrap()
    }

    #[test]
    fn constant_prices_give_zero_returns() {
        let rows = (1..=10).map(|i| (d(i), 100.0)).collect();
        let s = ReturnSeries::<f64>::from_prices("X", rows).unwrap();
        assert_eq!(s.returns, vec![0.0; 9]);
        let m = moments(&s).unwrap();
        assert_eq!(m.std, 0.0);
        assert_eq!(m.skewness, None);
        assert_eq!(m.kurtosis, None);
    }

    #[test]
    fn two_prices_one_return() {
        let s = ReturnSeries::<f64>::from_prices("X", vec![(d(1), 100.0), (d(2), 110.0)]).unwrap();
        assert_eq!(s.returns.len(), 1);
        assert!((s.returns[0] - 0.10).abs() < 1e-15);
    }

    #[test]
    fn insufficient_rows() {
        let err = ReturnSeries::<f64>::from_prices("X", vec![(d(1), 100.0), (d(2), 0.0)]).unwrap_err();
        assert!(matches!(err, MarketError::InsufficientObservations { usable: 1, .. }));
    }

    #[test]
    fn csv_drops_bad_rows_and_sorts() {
        let csv = "Date,Open,High,Low,Close,Adj Close,Volume\n\
                   2020-01-03,1,1,1,1,102.0,10\n\
                   2020-01-01,1,1,1,1,100.0,10\n\
                   2020-01-02,1,1,1,1,null,10\n\
                   2020-01-06,1,1,1,1,0,10\n\
                   2020-01-07,1,1,1,1,104.04,10\n";
        let s: ReturnSeries<f64> = parse_prices(csv.as_bytes(), "X", "mem").unwrap();
        assert_eq!(s.dates, vec![d(1), d(3), d(7)]);
        assert_eq!(s.returns.len(), 2);
        assert!((s.returns[0] - 0.02).abs() < 1e-12);
        assert!((s.returns[1] - 0.02).abs() < 1e-12);
    }

    #[test]
    fn csv_missing_column() {
        let err = parse_prices::<f64, _>("Date,Close\n2020-01-01,1\n".as_bytes(), "X", "mem").unwrap_err();
        assert!(err.to_string().contains("Adj Close"));
    }

    #[test]
    fn symmetric_alternating_sequence() {
        let r: Vec<f64> = (0..50).map(|i| if i % 2 == 0 { 0.01 } else { -0.01 }).collect();
        let m = moments_of("X", &r).unwrap();
        assert!(m.skewness.unwrap().abs() < 1e-12);
        assert!((population_excess_kurtosis(&r).unwrap() + 2.0).abs() < 1e-12);
        assert!(m.kurtosis.unwrap() < 0.0);
    }

    #[test]
    fn too_few_returns() {
        assert!(matches!(
            moments_of("X", &[0.1, 0.2, 0.3]),
            Err(MarketError::TooFewReturns { n: 3, .. })
        ));
    }

    #[test]
    fn summary_single_ticker() {
        let m = moments_of("X", &[0.01, -0.02, 0.03, 0.0, 0.05]).unwrap();
        let summary = cross_section_summary(&[m.clone()]).unwrap();
        let mean_col = &summary.columns[0];
        assert_eq!(mean_col.count, 1);
        assert!(mean_col.percentiles.iter().all(|&p| p == m.mean));
        assert_eq!(CrossSectionSummary::<f64>::row_labels().len(), 16);
        assert!(cross_section_summary::<f64>(&[]).is_err());
    }
}
