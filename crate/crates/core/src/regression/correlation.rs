use serde::{Deserialize, Serialize};

use super::RegressionError;
use crate::keywords::{MatrixView, MentionMatrix};
use crate::linalg::Matrix;
use crate::{stats, Scalar};

/// Pairwise Pearson correlations in percent; `None` marks a zero-variance
/// column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable<T> {
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<Option<T>>>,
}

impl<T: Scalar> CorrelationTable<T> {
    /// Integer percent for display, `NA` when undefined.
    pub fn display_cell(&self, i: usize, j: usize) -> String {
        match self.matrix[i][j] {
            Some(v) => {
                let r = v.to_f64_lossy().round();
                // avoid printing "-0"
                format!("{:.0}", if r == 0.0 { 0.0 } else { r })
            }
            None => "NA".to_string(),
        }
    }
}

pub fn correlation_matrix<T: Scalar>(
    x: &Matrix<T>,
    labels: &[String],
) -> Result<CorrelationTable<T>, RegressionError> {
    if x.nrows() < 2 {
        return Err(RegressionError::InsufficientObservations { n: x.nrows(), p: x.ncols() });
    }
    if labels.len() != x.ncols() {
        return Err(RegressionError::Dimension(format!(
            "{} labels for {} columns",
            labels.len(),
            x.ncols()
        )));
    }
    let p = x.ncols();
    let cols: Vec<Vec<T>> = (0..p).map(|j| x.column(j)).collect();
    let hundred = T::lit(100.0);
    let mut matrix = vec![vec![None; p]; p];
    for i in 0..p {
        if !stats::is_constant(&cols[i]) {
            matrix[i][i] = Some(hundred);
        }
        for j in (i + 1)..p {
            let r = stats::pearson(&cols[i], &cols[j]).map(|r| r * hundred);
            matrix[i][j] = r;
            matrix[j][i] = r;
        }
    }
    Ok(CorrelationTable {
        labels: labels.to_vec(),
        matrix,
    })
}

pub fn mention_correlation<T: Scalar>(
    m: &MentionMatrix,
    view: MatrixView,
) -> Result<CorrelationTable<T>, RegressionError> {
    correlation_matrix(&m.design(view), &m.lexicon.labels())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_with_unit_diagonal() {
        let x = Matrix::from_rows(&[[1.0, 0.0, 2.0], [0.0, 1.0, 2.0], [1.0, 1.0, 2.0], [0.0, 0.0, 2.0]]);
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let t = correlation_matrix(&x, &labels).unwrap();
        assert_eq!(t.matrix[0][0], Some(100.0));
        assert_eq!(t.matrix[0][1], t.matrix[1][0]);
        assert_eq!(t.matrix[2][2], None);
        assert_eq!(t.display_cell(2, 0), "NA");
        assert_eq!(t.display_cell(0, 0), "100");
        assert_eq!(t.display_cell(0, 1), "0");
    }

    #[test]
    fn needs_two_rows() {
        let x = Matrix::from_rows(&[[1.0, 2.0]]);
        assert!(correlation_matrix(&x, &["a".into(), "b".into()]).is_err());
    }
}
