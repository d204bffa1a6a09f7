//! Thin SVD of the mention matrix, explained variance, rank selection and
//! approximate factors.
//!
//! The decomposition is a one-sided (Hestenes) Jacobi iteration: columns of
//! the working matrix are rotated pairwise until they are mutually orthogonal,
//! at which point their norms are the singular values and the accumulated
//! rotations form `V`. Matrices wider than tall are handled through their
//! transpose.
//!
//! Sign convention: every right singular vector `v_k` has its largest-magnitude
//! entry non-negative, with ties resolved by the lowest index. `u_k` is flipped
//! together with `v_k`, so `X = U diag(s) V^T` is preserved.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, norm, Matrix};
use crate::stats;
use crate::Scalar;

const MAX_SWEEPS: usize = 80;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("zero Frobenius norm")]
    ZeroNorm,
    #[error("invalid rank rule: {0}")]
    InvalidRule(String),
    #[error("rank exceeded: requested {requested} factors but only {positive} positive singular values")]
    RankExceeded { requested: usize, positive: usize },
    #[error("singular vector index {index} out of range (rank {rank})")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// `X = U diag(s) V^T` with `r = min(n_rows, n_cols)` retained triplets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvdResult<T> {
    /// `n_rows x r`, orthonormal columns.
    pub u: Matrix<T>,
    /// Length `r`, non-increasing, non-negative.
    pub s: Vec<T>,
    /// `n_cols x r`, orthonormal columns.
    pub v: Matrix<T>,
    pub n_rows: usize,
    pub n_cols: usize,
}

impl<T: Scalar> SvdResult<T> {
    pub fn rank_bound(&self) -> usize {
        self.s.len()
    }

    /// Number of strictly positive singular values.
    pub fn positive_count(&self) -> usize {
        self.s.iter().filter(|&&s| s > T::zero()).count()
    }

    pub fn u_col(&self, k: usize) -> Vec<T> {
        self.u.column(k)
    }

    pub fn v_col(&self, k: usize) -> Vec<T> {
        self.v.column(k)
    }

    /// `U diag(s) V^T`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let r = self.s.len();
        Matrix::from_fn(self.n_rows, self.n_cols, |i, j| {
            (0..r).fold(T::zero(), |acc, k| {
                acc + self.u[(i, k)] * self.s[k] * self.v[(j, k)]
            })
        })
    }

    pub fn explained_variance(&self) -> Result<Vec<T>, SpectralError> {
        explained_variance(&self.s)
    }
}

/// Thin SVD of `x`.
pub fn decompose<T: Scalar>(x: &Matrix<T>) -> Result<SvdResult<T>, SpectralError> {
    let (n, p) = (x.nrows(), x.ncols());
    if n == 0 || p == 0 {
        return Err(SpectralError::Empty);
    }
    for i in 0..n {
        for j in 0..p {
            if !x[(i, j)].is_finite() {
                return Err(SpectralError::NonFinite { row: i, col: j });
            }
        }
    }

    let (u, s, v) = if n >= p {
        jacobi_tall(x)
    } else {
        // X^T = U' S V'^T  =>  X = V' S U'^T
        let (ut, st, vt) = jacobi_tall(&x.transpose());
        (vt, st, ut)
    };

    let mut out = SvdResult {
        u,
        s,
        v,
        n_rows: n,
        n_cols: p,
    };
    apply_sign_convention(&mut out);
    Ok(out)
}

/// One-sided Jacobi for `n >= p`. Returns column-oriented `U (n x p)`,
/// `s (p)` and `V (p x p)`, sorted by descending singular value.
fn jacobi_tall<T: Scalar>(x: &Matrix<T>) -> (Matrix<T>, Vec<T>, Matrix<T>) {
    let (n, p) = (x.nrows(), x.ncols());
    debug_assert!(n >= p);
    let mut a: Vec<Vec<T>> = (0..p).map(|j| x.column(j)).collect();
    let mut v: Vec<Vec<T>> = (0..p)
        .map(|j| {
            let mut e = vec![T::zero(); p];
            e[j] = T::one();
            e
        })
        .collect();

    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in (i + 1)..p {
                let alpha = dot(&a[i], &a[i]);
                let beta = dot(&a[j], &a[j]);
                let gamma = dot(&a[i], &a[j]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + T::one().hypot(zeta));
                let c = T::one() / T::one().hypot(t);
                let s = c * t;
                let (left, right) = a.split_at_mut(j);
                rotate(&mut left[i], &mut right[0], c, s);
                let (left, right) = v.split_at_mut(j);
                rotate(&mut left[i], &mut right[0], c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<T> = a.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap().then(i.cmp(&j)));

    let s_max = sv[order[0]];
    let tol = T::from_usize_lossy(n.max(p)) * eps * s_max;

    let mut u_cols: Vec<Option<Vec<T>>> = Vec::with_capacity(p);
    let mut s_sorted = Vec::with_capacity(p);
    let mut v_sorted = Vec::with_capacity(p);
    for &k in &order {
        let sk = sv[k];
        if sk > tol && sk > T::zero() {
            let mut col: Vec<T> = a[k].iter().map(|&x| x / sk).collect();
            // a tiny sk amplifies rounding in the quotient; re-orthogonalize
            for _ in 0..2 {
                for prev in u_cols.iter().flatten() {
                    let d = dot(prev, &col);
                    col.iter_mut().zip(prev).for_each(|(c, &q)| *c -= d * q);
                }
            }
            let nc = norm(&col);
            col.iter_mut().for_each(|c| *c /= nc);
            u_cols.push(Some(col));
            s_sorted.push(sk);
        } else {
            u_cols.push(None);
            s_sorted.push(T::zero());
        }
        v_sorted.push(std::mem::take(&mut v[k]));
        sv[k] = T::zero();
    }

    let u_cols = complete_basis(u_cols, n);
    let u = Matrix::from_fn(n, p, |i, k| u_cols[k][i]);
    let vm = Matrix::from_fn(p, p, |i, k| v_sorted[k][i]);
    (u, s_sorted, vm)
}

fn rotate<T: Scalar>(x: &mut [T], y: &mut [T], c: T, s: T) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xi;
        let b = *yi;
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Fills `None` slots with unit vectors orthogonal to every other column,
/// drawn deterministically from the standard basis.
fn complete_basis<T: Scalar>(mut cols: Vec<Option<Vec<T>>>, n: usize) -> Vec<Vec<T>> {
    for slot in 0..cols.len() {
        if cols[slot].is_some() {
            continue;
        }
        let basis: Vec<Vec<T>> = cols.iter().flatten().cloned().collect();
        let m = basis.len();
        // some e_j keeps at least (n - m) / n of its squared norm
        let threshold = T::from_usize_lossy(n - m) / T::from_usize_lossy(2 * n);
        let mut chosen = None;
        for j in 0..n {
            let mut w = vec![T::zero(); n];
            w[j] = T::one();
            for _ in 0..2 {
                for q in &basis {
                    let d = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(wi, &qi)| *wi -= d * qi);
                }
            }
            let nw = dot(&w, &w);
            if nw >= threshold {
                let len = nw.sqrt();
                w.iter_mut().for_each(|x| *x /= len);
                chosen = Some(w);
                break;
            }
        }
        cols[slot] = Some(chosen.expect("a completing basis vector always exists"));
    }
    cols.into_iter().map(|c| c.unwrap()).collect()
}

fn apply_sign_convention<T: Scalar>(svd: &mut SvdResult<T>) {
    for k in 0..svd.s.len() {
        let mut best = 0;
        let mut best_abs = T::neg_infinity();
        for i in 0..svd.n_cols {
            let a = svd.v[(i, k)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if svd.v[(best, k)] < T::zero() {
            for i in 0..svd.n_cols {
                svd.v[(i, k)] = -svd.v[(i, k)];
            }
            for i in 0..svd.n_rows {
                svd.u[(i, k)] = -svd.u[(i, k)];
            }
        }
    }
}

/// Share of squared Frobenius norm carried by each singular triplet.
pub fn explained_variance<T: Scalar>(s: &[T]) -> Result<Vec<T>, SpectralError> {
    let total = s.iter().fold(T::zero(), |a, &x| a + x * x);
    if total <= T::zero() {
        return Err(SpectralError::ZeroNorm);
    }
    Ok(s.iter().map(|&x| x * x / total).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankRule<T> {
    /// Keep `min(k, r)` components.
    Fixed(usize),
    /// Keep every leading component whose explained variance exceeds the
    /// threshold, and at least one.
    Threshold(T),
}

impl<T: Scalar> Default for RankRule<T> {
    fn default() -> Self {
        RankRule::Threshold(T::lit(0.05))
    }
}

pub fn select_rank<T: Scalar>(var_explained: &[T], rule: RankRule<T>) -> Result<usize, SpectralError> {
    if var_explained.is_empty() {
        return Err(SpectralError::InvalidRule("empty explained-variance vector".into()));
    }
    match rule {
        RankRule::Fixed(0) => Err(SpectralError::InvalidRule("fixed rank must be at least 1".into())),
        RankRule::Fixed(k) => Ok(k.min(var_explained.len())),
        RankRule::Threshold(tau) => {
            if !(tau >= T::zero() && tau < T::one()) {
                return Err(SpectralError::InvalidRule(format!(
                    "threshold {tau} outside [0, 1)"
                )));
            }
            let kept = var_explained.iter().take_while(|&&v| v > tau).count();
            Ok(kept.max(1))
        }
    }
}

/// Retained approximate factors, column `k` equal to `X v_k / sqrt(s_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSet<T> {
    pub k_star: usize,
    /// `n x k_star`.
    pub factors: Matrix<T>,
    pub source_id: String,
    pub var_explained: Vec<T>,
}

impl<T: Scalar> FactorSet<T> {
    pub fn labels(&self) -> Vec<String> {
        (0..self.k_star).map(|k| format!("F{k}")).collect()
    }
}

pub fn build_factors<T: Scalar>(
    x: &Matrix<T>,
    svd: &SvdResult<T>,
    k_star: usize,
    source_id: impl Into<String>,
) -> Result<FactorSet<T>, SpectralError> {
    if x.nrows() != svd.n_rows || x.ncols() != svd.n_cols {
        return Err(SpectralError::Dimension(format!(
            "matrix is {}x{} but decomposition is {}x{}",
            x.nrows(),
            x.ncols(),
            svd.n_rows,
            svd.n_cols
        )));
    }
    let positive = svd.positive_count();
    if k_star == 0 || k_star > positive {
        return Err(SpectralError::RankExceeded {
            requested: k_star,
            positive,
        });
    }
    let mut factors = Matrix::zeros(x.nrows(), k_star);
    for k in 0..k_star {
        let scale = svd.s[k].sqrt();
        let col: Vec<T> = x.matvec(&svd.v_col(k)).into_iter().map(|f| f / scale).collect();
        factors.set_column(k, &col);
    }
    Ok(FactorSet {
        k_star,
        factors,
        source_id: source_id.into(),
        var_explained: svd.explained_variance()?,
    })
}

/// Entries of `v_k` paired with feature labels, largest magnitude first.
pub fn vector_composition<T: Scalar>(
    svd: &SvdResult<T>,
    k: usize,
    labels: &[String],
) -> Result<Vec<(String, T)>, SpectralError> {
    if k >= svd.rank_bound() {
        return Err(SpectralError::IndexOutOfRange {
            index: k,
            rank: svd.rank_bound(),
        });
    }
    if labels.len() != svd.n_cols {
        return Err(SpectralError::Dimension(format!(
            "{} labels for {} columns",
            labels.len(),
            svd.n_cols
        )));
    }
    let mut out: Vec<(String, T)> = labels
        .iter()
        .cloned()
        .zip(svd.v_col(k))
        .collect();
    // stable: equal magnitudes keep column order
    out.sort_by(|a, b| b.1.abs().partial_cmp(&a.1.abs()).unwrap());
    Ok(out)
}

/// Pearson correlation of each factor with each feature column; `None` for
/// zero-variance columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorCorrelation<T> {
    pub factor_labels: Vec<String>,
    pub feature_labels: Vec<String>,
    /// `k_star x p`.
    pub values: Vec<Vec<Option<T>>>,
}

pub fn factor_feature_correlation<T: Scalar>(
    factors: &FactorSet<T>,
    x: &Matrix<T>,
    feature_labels: &[String],
) -> Result<FactorCorrelation<T>, SpectralError> {
    if factors.factors.nrows() != x.nrows() || feature_labels.len() != x.ncols() {
        return Err(SpectralError::Dimension(
            "factor rows, matrix rows and labels must agree".into(),
        ));
    }
    let cols: Vec<Vec<T>> = (0..x.ncols()).map(|j| x.column(j)).collect();
    let values = (0..factors.k_star)
        .map(|k| {
            let f = factors.factors.column(k);
            cols.iter().map(|c| stats::pearson(&f, c)).collect()
        })
        .collect();
    Ok(FactorCorrelation {
        factor_labels: factors.labels(),
        feature_labels: feature_labels.to_vec(),
        values,
    })
}

/// Subtracts each column's mean; used only for sensitivity runs.
pub fn center_columns<T: Scalar>(x: &Matrix<T>) -> Matrix<T> {
    let means: Vec<T> = (0..x.ncols()).map(|j| stats::mean(&x.column(j))).collect();
    Matrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - means[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let svd = decompose(&Matrix::<f64>::identity(3)).unwrap();
        assert_eq!(svd.s, vec![1.0, 1.0, 1.0]);
        let ve = svd.explained_variance().unwrap();
        for v in ve {
            assert_close(v, 1.0 / 3.0, 1e-15);
        }
    }

    #[test]
    fn rank_one_closed_form() {
        let a = [1.0, -2.0, 3.0, 0.5];
        let b = [2.0, 1.0, -1.0];
        let x = Matrix::from_fn(4, 3, |i, j| a[i] * b[j]);
        let svd = decompose(&x).unwrap();
        let expected = norm(&a) * norm(&b);
        assert_close(svd.s[0], expected, 1e-10);
        assert_eq!(&svd.s[1..], &[0.0, 0.0]);
        assert_eq!(svd.positive_count(), 1);
        let err = build_factors(&x, &svd, 2, "x").unwrap_err();
        assert_eq!(err, SpectralError::RankExceeded { requested: 2, positive: 1 });
    }

    #[test]
    fn wide_matrix_uses_transpose() {
        let x = Matrix::from_rows(&[[1.0, 2.0, 3.0, 4.0], [2.0, 0.0, 1.0, -1.0]]);
        let svd = decompose(&x).unwrap();
        assert_eq!(svd.u.nrows(), 2);
        assert_eq!(svd.v.nrows(), 4);
        assert_eq!(svd.s.len(), 2);
        assert!(svd.reconstruct().sub(&x).max_abs() < 1e-12);
    }

    #[test]
    fn sign_convention_largest_entry_non_negative() {
        let x = Matrix::from_rows(&[[-3.0, 0.0], [0.0, -1.0], [-1.0, 0.0]]);
        let svd = decompose(&x).unwrap();
        for k in 0..2 {
            let v = svd.v_col(k);
            let (idx, _) = v
                .iter()
                .enumerate()
                .fold((0usize, -1.0f64), |(bi, bv), (i, &x): (usize, &f64)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) });
            assert!(v[idx] >= 0.0);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut x = Matrix::<f64>::zeros(2, 2);
        x[(1, 0)] = f64::NAN;
        assert_eq!(decompose(&x).unwrap_err(), SpectralError::NonFinite { row: 1, col: 0 });
        assert_eq!(decompose(&Matrix::<f64>::zeros(0, 3)).unwrap_err(), SpectralError::Empty);
        let zero = decompose(&Matrix::<f64>::zeros(3, 2)).unwrap();
        assert_eq!(zero.explained_variance().unwrap_err(), SpectralError::ZeroNorm);
        // zero matrix still gets orthonormal bases
        let utu = zero.u.transpose().matmul(&zero.u).sub(&Matrix::identity(2));
        assert!(utu.max_abs() < 1e-15);
    }

    #[test]
    fn explained_variance_arithmetic() {
        let ve = explained_variance(&[2.0, 1.0]).unwrap();
        assert_close(ve[0], 0.8, 1e-15);
        assert_close(ve[1], 0.2, 1e-15);
        assert_eq!(explained_variance(&[3.0, 3.0, 3.0, 3.0]).unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn rank_rules() {
        let uniform = [0.25, 0.25, 0.25, 0.25];
        assert_eq!(select_rank(&uniform, RankRule::Threshold(0.3)).unwrap(), 1);
        assert_eq!(select_rank(&uniform, RankRule::Threshold(0.2)).unwrap(), 4);
        assert_eq!(select_rank(&uniform, RankRule::Fixed(9)).unwrap(), 4);
        assert!(select_rank(&uniform, RankRule::Fixed(0)).is_err());
        assert!(select_rank(&uniform, RankRule::Threshold(1.0)).is_err());
        assert!(select_rank(&uniform, RankRule::Threshold(-0.1)).is_err());
        assert!(select_rank::<f64>(&[], RankRule::Fixed(1)).is_err());
    }

    #[test]
    fn identity_factors_are_basis_vectors() {
        let x = Matrix::<f64>::identity(3);
        let svd = decompose(&x).unwrap();
        let fs = build_factors(&x, &svd, 3, "identity").unwrap();
        for k in 0..3 {
            let col = fs.factors.column(k);
            assert_eq!(col.iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(col.iter().filter(|&&v| v == 0.0).count(), 2);
        }
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let comp = vector_composition(&svd, 0, &labels).unwrap();
        assert_eq!(comp[0].1, 1.0);
        assert!(comp[1..].iter().all(|(_, c)| *c == 0.0));
        assert!(vector_composition(&svd, 3, &labels).is_err());
    }

    #[test]
    fn factor_correlation_affine_feature() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [2.0, 1.0], [3.0, 0.0], [5.0, 1.0]]);
        let svd = decompose(&x).unwrap();
        let fs = build_factors(&x, &svd, 1, "x").unwrap();
        // append the factor itself (affinely mapped) as a feature
        let f = fs.factors.column(0);
        let x2 = Matrix::from_fn(4, 3, |i, j| if j < 2 { x[(i, j)] } else { 2.0 * f[i] - 7.0 });
        let labels: Vec<String> = ["a", "b", "f"].iter().map(|s| s.to_string()).collect();
        let corr = factor_feature_correlation(&fs, &x2, &labels).unwrap();
        assert_close(corr.values[0][2].unwrap(), 1.0, 1e-10);
        let constant = Matrix::from_fn(4, 1, |_, _| 1.0);
        let corr = factor_feature_correlation(&fs, &constant, &labels[..1]).unwrap();
        assert_eq!(corr.values[0][0], None);
    }

    #[test]
    fn f32_decomposition() {
        let x = Matrix::<f32>::from_rows(&[[3.0, 1.0], [1.0, 3.0], [0.0, 1.0]]);
        let svd = decompose(&x).unwrap();
        assert!(svd.reconstruct().sub(&x).max_abs() < 1e-5);
        assert!(svd.s[0] >= svd.s[1]);
    }
}
