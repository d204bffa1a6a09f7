//! ESG keyword mining over regulatory filings, cross-sectional return
//! moments, and the two ways of relating them: OLS on raw mention
//! regressors and OLS on approximate factors from an SVD of the mention
//! matrix.
//!
//! The numerical modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the pipeline uses.

pub mod ingest;
pub mod keywords;
pub mod linalg;
pub mod market;
pub mod period;
pub mod regression;
pub mod report;
mod scalar;
pub mod spectral;
pub mod stats;

pub use scalar::Scalar;

pub type Mat = linalg::Matrix<f64>;
pub type Svd = spectral::SvdResult<f64>;
pub type Factors = spectral::FactorSet<f64>;
pub type FactorCorrelations = spectral::FactorCorrelation<f64>;
pub type RankRule = spectral::RankRule<f64>;
pub type Returns = market::ReturnSeries<f64>;
pub type Moments = market::MomentStats<f64>;
pub type Summary = market::CrossSectionSummary<f64>;
pub type Regression = regression::RegressionResult<f64>;
pub type Suite = regression::SuiteResult<f64>;
pub type Correlations = regression::CorrelationTable<f64>;
pub type DesignMatrix = regression::Design<f64>;

pub type MatF32 = linalg::Matrix<f32>;
pub type SvdF32 = spectral::SvdResult<f32>;

/// The example ticker universe, one symbol per line.
pub const EXAMPLE_TICKERS: &str = include_str!("../data/example_tickers.txt");
