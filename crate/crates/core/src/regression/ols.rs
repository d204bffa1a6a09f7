//! Ordinary least squares with an intercept, solved by Householder QR.
//!
//! Columns are processed left to right (intercept first). A column whose
//! component orthogonal to the already accepted columns is negligible is
//! treated as exactly collinear and dropped, so the fit always uses a maximal
//! independent subset that prefers earlier columns.

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::student_t;
use crate::linalg::{dot, Matrix};
use crate::{spectral, stats, Scalar};

pub const INTERCEPT: &str = "Intercept";

/// Condition number of the retained design above which a warning is logged.
pub const CONDITION_WARNING: f64 = 1e8;

#[derive(Debug, Error, PartialEq)]
pub enum RegressionError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("insufficient observations: n = {n} with {p} regressors (need n >= p + 2)")]
    InsufficientObservations { n: usize, p: usize },
    #[error("response has zero variance")]
    ConstantResponse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult<T> {
    /// Name of the response variable, empty when unnamed.
    pub dependent: String,
    /// Retained regressors in input order, then `Intercept`.
    pub term_labels: Vec<String>,
    pub coefficients: Vec<T>,
    pub standard_errors: Vec<T>,
    /// `None` where the standard error is zero.
    pub t_stats: Vec<Option<T>>,
    /// Two-tailed, Student's t with `n_obs - n_regressors - 1` degrees of freedom.
    pub p_values: Vec<Option<T>>,
    pub r_squared: T,
    pub adj_r_squared: T,
    pub n_obs: usize,
    /// Effective regressor count, intercept excluded.
    pub n_regressors: usize,
    pub rank_deficient: bool,
    /// Columns removed for zero variance or exact collinearity.
    pub dropped_columns: Vec<String>,
    /// `s_max / s_min` of the retained design including the intercept column.
    pub condition_number: Option<T>,
}

impl<T: Scalar> RegressionResult<T> {
    pub fn dof(&self) -> usize {
        self.n_obs - self.n_regressors - 1
    }

    pub fn term_index(&self, label: &str) -> Option<usize> {
        self.term_labels.iter().position(|l| l == label)
    }

    pub fn coefficient(&self, label: &str) -> Option<T> {
        self.term_index(label).map(|i| self.coefficients[i])
    }
}

/// Fits `y = b0 + X b + e`.
pub fn ols<T: Scalar>(
    y: &[T],
    x: &Matrix<T>,
    labels: &[String],
) -> Result<RegressionResult<T>, RegressionError> {
    let n = y.len();
    let p = x.ncols();
    if x.nrows() != n {
        return Err(RegressionError::Dimension(format!(
            "response has {n} rows, design has {}",
            x.nrows()
        )));
    }
    if labels.len() != p {
        return Err(RegressionError::Dimension(format!(
            "{} labels for {p} columns",
            labels.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(RegressionError::NonFinite("response"));
    }
    if !x.is_finite() {
        return Err(RegressionError::NonFinite("design"));
    }
    if n < 2 {
        return Err(RegressionError::InsufficientObservations { n, p });
    }

    let mut dropped = Vec::new();
    let mut candidates = Vec::new();
    for j in 0..p {
        let col = x.column(j);
        if stats::is_constant(&col) {
            debug!("dropping zero-variance regressor '{}'", labels[j]);
            dropped.push(labels[j].clone());
        } else {
            candidates.push(j);
        }
    }

    // intercept first, then the surviving regressors
    let mut columns: Vec<Vec<T>> = Vec::with_capacity(candidates.len() + 1);
    columns.push(vec![T::one(); n]);
    columns.extend(candidates.iter().map(|&j| x.column(j)));

    let qr = HouseholderQr::factor(&columns, y);
    let mut rank_deficient = false;
    for &c in &qr.rejected {
        // column 0 is the intercept and is never rejected: it is processed first
        let label = &labels[candidates[c - 1]];
        info!("dropping collinear regressor '{label}'");
        dropped.push(label.clone());
        rank_deficient = true;
    }
    let retained: Vec<usize> = qr.accepted.iter().skip(1).map(|&c| candidates[c - 1]).collect();
    let k = qr.accepted.len();
    let p_eff = k - 1;
    if n < p_eff + 2 {
        return Err(RegressionError::InsufficientObservations { n, p: p_eff });
    }

    let beta_qr = qr.solve();
    // reorder: regressors then intercept
    let mut coefficients: Vec<T> = beta_qr[1..].to_vec();
    coefficients.push(beta_qr[0]);

    let mut fitted = vec![beta_qr[0]; n];
    for (slot, &j) in retained.iter().enumerate() {
        let b = beta_qr[slot + 1];
        for (f, i) in fitted.iter_mut().zip(0..n) {
            *f += b * x[(i, j)];
        }
    }
    let residuals: Vec<T> = y.iter().zip(&fitted).map(|(&a, &b)| a - b).collect();
    let ssr = dot(&residuals, &residuals);
    let y_mean = stats::mean(y);
    let sst = y.iter().fold(T::zero(), |a, &v| a + (v - y_mean) * (v - y_mean));
    if sst == T::zero() {
        return Err(RegressionError::ConstantResponse);
    }
    // with an intercept 0 <= ssr <= sst; clamp rounding only
    let r_squared = (T::one() - ssr / sst).max(T::zero()).min(T::one());
    let n_t = T::from_usize_lossy(n);
    let dof = n - p_eff - 1;
    let dof_t = T::from_usize_lossy(dof);
    let adj_r_squared = T::one() - (T::one() - r_squared) * (n_t - T::one()) / dof_t;
    let sigma2 = ssr / dof_t;

    let diag = qr.inverse_gram_diagonal();
    let mut standard_errors: Vec<T> = diag[1..].iter().map(|&d| (sigma2 * d).sqrt()).collect();
    standard_errors.push((sigma2 * diag[0]).sqrt());

    let t_stats: Vec<Option<T>> = coefficients
        .iter()
        .zip(&standard_errors)
        .map(|(&b, &se)| (se > T::zero()).then(|| b / se))
        .collect();
    let p_values = t_stats
        .iter()
        .map(|t| t.map(|t| student_t::two_tailed_p(t, dof_t)))
        .collect();

    let mut term_labels: Vec<String> = retained.iter().map(|&j| labels[j].clone()).collect();
    term_labels.push(INTERCEPT.to_string());

    let retained_design = Matrix::from_fn(n, k, |i, c| qr.original[qr.accepted[c]][i]);
    let condition_number = condition_number(&retained_design);
    if let Some(cn) = condition_number {
        if cn > T::lit(CONDITION_WARNING) {
            warn!("design is near rank-deficient: condition number {cn}");
        }
    }

    Ok(RegressionResult {
        dependent: String::new(),
        term_labels,
        coefficients,
        standard_errors,
        t_stats,
        p_values,
        r_squared,
        adj_r_squared,
        n_obs: n,
        n_regressors: p_eff,
        rank_deficient,
        dropped_columns: dropped,
        condition_number,
    })
}

fn condition_number<T: Scalar>(design: &Matrix<T>) -> Option<T> {
    let svd = spectral::decompose(design).ok()?;
    let max = *svd.s.first()?;
    let min = *svd.s.last()?;
    (min > T::zero()).then(|| max / min)
}

struct HouseholderQr<T> {
    original: Vec<Vec<T>>,
    /// Indices into `original` of accepted columns, in acceptance order.
    accepted: Vec<usize>,
    rejected: Vec<usize>,
    /// Upper triangle, `r[row][col]` over accepted columns.
    r: Vec<Vec<T>>,
    qty: Vec<T>,
}

impl<T: Scalar> HouseholderQr<T> {
    fn factor(columns: &[Vec<T>], y: &[T]) -> Self {
        let n = y.len();
        let tol = T::epsilon().sqrt() * T::lit(0.1);
        let mut work: Vec<Vec<T>> = columns.to_vec();
        let mut qty = y.to_vec();
        let mut accepted = Vec::new();
        let mut rejected = Vec::new();
        let mut row = 0;
        for c in 0..work.len() {
            let orig_norm = dot(&columns[c], &columns[c]).sqrt();
            if row >= n {
                rejected.push(c);
                continue;
            }
            let tail_norm = dot(&work[c][row..], &work[c][row..]).sqrt();
            if orig_norm == T::zero() || tail_norm <= tol * orig_norm {
                rejected.push(c);
                continue;
            }
            // reflector mapping work[c][row..] onto -sign * ||.|| e_1
            let alpha = if work[c][row] >= T::zero() { -tail_norm } else { tail_norm };
            let mut v: Vec<T> = work[c][row..].to_vec();
            v[0] -= alpha;
            let vnorm2 = dot(&v, &v);
            if vnorm2 > T::zero() {
                let two = T::lit(2.0);
                let apply = |target: &mut [T]| {
                    let s = two * dot(&v, target) / vnorm2;
                    target.iter_mut().zip(&v).for_each(|(t, &vi)| *t -= s * vi);
                };
                for later in work.iter_mut().skip(c) {
                    apply(&mut later[row..]);
                }
                apply(&mut qty[row..]);
            }
            accepted.push(c);
            row += 1;
        }
        let k = accepted.len();
        let r = (0..k)
            .map(|i| accepted.iter().map(|&c| work[c][i]).collect())
            .collect();
        Self {
            original: columns.to_vec(),
            accepted,
            rejected,
            r,
            qty,
        }
    }

    fn solve(&self) -> Vec<T> {
        let k = self.accepted.len();
        let mut beta = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut acc = self.qty[i];
            for j in (i + 1)..k {
                acc -= self.r[i][j] * beta[j];
            }
            beta[i] = acc / self.r[i][i];
        }
        beta
    }

    /// Diagonal of `(Z^T Z)^{-1} = R^{-1} R^{-T}`.
    fn inverse_gram_diagonal(&self) -> Vec<T> {
        let k = self.accepted.len();
        // columns of R^{-1}
        let mut rinv = vec![vec![T::zero(); k]; k];
        for col in 0..k {
            for i in (0..=col).rev() {
                let mut acc = if i == col { T::one() } else { T::zero() };
                for j in (i + 1)..=col {
                    acc -= self.r[i][j] * rinv[j][col];
                }
                rinv[i][col] = acc / self.r[i][i];
            }
        }
        (0..k)
            .map(|i| rinv[i].iter().fold(T::zero(), |a, &v| a + v * v))
            .collect()
    }
}
