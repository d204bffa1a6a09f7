//! Cross-sectional OLS, significance flags, the regression grid and Pearson
//! correlation tables.

mod correlation;
mod ols;
pub mod student_t;
mod suite;

use serde::{Deserialize, Serialize};

pub use correlation::{correlation_matrix, mention_correlation, CorrelationTable};
pub use ols::{ols, RegressionError, RegressionResult, CONDITION_WARNING, INTERCEPT};
pub use suite::{regression_suite, Design, DesignKind, SuiteResult};

use crate::Scalar;

/// Per-term significance from two-tailed p-values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Significance {
    None,
    /// `p < 1 - confidence` (90% by default).
    Significant,
    /// `p < 0.01`.
    HighlySignificant,
}

impl Significance {
    pub fn label(self) -> &'static str {
        match self {
            Significance::None => "",
            Significance::Significant => "90%",
            Significance::HighlySignificant => "99%",
        }
    }
}

pub const DEFAULT_CONFIDENCE: f64 = 0.90;
pub const HIGH_SIGNIFICANCE_P: f64 = 0.01;

pub fn flag_for_p<T: Scalar>(p: Option<T>, confidence: f64) -> Significance {
    let Some(p) = p.map(|p| p.to_f64_lossy()) else {
        return Significance::None;
    };
    if p.is_nan() {
        Significance::None
    } else if p < HIGH_SIGNIFICANCE_P {
        Significance::HighlySignificant
    } else if p < 1.0 - confidence {
        Significance::Significant
    } else {
        Significance::None
    }
}

/// Flags each term; thresholds are strict inequalities.
pub fn significance_flags<T: Scalar>(result: &RegressionResult<T>, confidence: f64) -> Vec<Significance> {
    result.p_values.iter().map(|&p| flag_for_p(p, confidence)).collect()
}
