use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ols, RegressionError, RegressionResult};
use crate::keywords::{MatrixView, MentionMatrix};
use crate::linalg::Matrix;
use crate::market::{Moment, MomentStats};
use crate::spectral::FactorSet;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    /// Raw mention regressors, one per keyword.
    Raw,
    /// Approximate factors derived from a mention view.
    Factors,
}

/// Regressors keyed by ticker.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Design<T> {
    pub kind: DesignKind,
    pub view: MatrixView,
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
    pub matrix: Matrix<T>,
}

impl<T: Scalar> Design<T> {
    pub fn from_mentions(m: &MentionMatrix, view: MatrixView) -> Self {
        Self {
            kind: DesignKind::Raw,
            view,
            row_labels: m.companies.clone(),
            column_labels: m.lexicon.labels(),
            matrix: m.design(view),
        }
    }

    pub fn from_factors(tickers: &[String], factors: &FactorSet<T>, view: MatrixView) -> Self {
        assert_eq!(tickers.len(), factors.factors.nrows(), "one ticker per factor row");
        Self {
            kind: DesignKind::Factors,
            view,
            row_labels: tickers.to_vec(),
            column_labels: factors.labels(),
            matrix: factors.factors.clone(),
        }
    }

    /// Stable identifier such as `dummy_raw` or `count_factors`.
    pub fn name(&self) -> String {
        let kind = match self.kind {
            DesignKind::Raw => "raw",
            DesignKind::Factors => "factors",
        };
        format!("{}_{kind}", self.view.key())
    }
}

/// The four moment regressions for one design and one return window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult<T> {
    pub design: String,
    pub window: String,
    /// Mean, std, skewness, kurtosis, in that order.
    pub results: Vec<RegressionResult<T>>,
    /// Design rows without return statistics.
    pub unmatched_design: Vec<String>,
    /// Return statistics without a design row.
    pub unmatched_stats: Vec<String>,
    /// Per dependent, tickers left out because the moment is undefined.
    pub undefined: BTreeMap<String, Vec<String>>,
}

/// Inner-joins the design with return moments on ticker and regresses each
/// moment on the design.
pub fn regression_suite<T: Scalar>(
    design: &Design<T>,
    stats: &[MomentStats<T>],
    window: &str,
) -> Result<SuiteResult<T>, RegressionError> {
    let by_ticker: BTreeMap<&str, &MomentStats<T>> = stats.iter().map(|s| (s.ticker.as_str(), s)).collect();
    let design_rows: BTreeSet<&str> = design.row_labels.iter().map(String::as_str).collect();
    let unmatched_design: Vec<String> = design
        .row_labels
        .iter()
        .filter(|t| !by_ticker.contains_key(t.as_str()))
        .cloned()
        .collect();
    let unmatched_stats: Vec<String> = by_ticker
        .keys()
        .filter(|t| !design_rows.contains(*t))
        .map(|t| t.to_string())
        .collect();

    let mut results = Vec::with_capacity(4);
    let mut undefined = BTreeMap::new();
    for moment in Moment::ALL {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        let mut missing = Vec::new();
        for (i, t) in design.row_labels.iter().enumerate() {
            let Some(s) = by_ticker.get(t.as_str()) else { continue };
            match moment.of(s) {
                Some(v) => {
                    rows.push(i);
                    y.push(v);
                }
                None => missing.push(t.clone()),
            }
        }
        if !missing.is_empty() {
            undefined.insert(moment.key().to_string(), missing);
        }
        let x = design.matrix.select_rows(&rows);
        let mut res = ols(&y, &x, &design.column_labels)?;
        res.dependent = moment.short_label().to_string();
        results.push(res);
    }
    Ok(SuiteResult {
        design: design.name(),
        window: window.to_string(),
        results,
        unmatched_design,
        unmatched_stats,
        undefined,
    })
}
