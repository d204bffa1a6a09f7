use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{scan_corpus, KeywordError, Lexicon, ScannedFiling, Scanner};
use crate::ingest::CorpusIndex;
use crate::linalg::Matrix;
use crate::period::DateRange;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixView {
    Dummy,
    Count,
}

impl MatrixView {
    pub const ALL: [MatrixView; 2] = [MatrixView::Dummy, MatrixView::Count];

    pub fn key(self) -> &'static str {
        match self {
            MatrixView::Dummy => "dummy",
            MatrixView::Count => "count",
        }
    }
}

impl std::str::FromStr for MatrixView {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dummy" => Ok(MatrixView::Dummy),
            "count" => Ok(MatrixView::Count),
            other => Err(format!("unknown matrix view '{other}' (expected dummy or count)")),
        }
    }
}

/// Company x keyword mention counts over one period.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionMatrix {
    /// Sorted tickers (rows).
    pub companies: Vec<String>,
    /// Columns, in lexicon order.
    pub lexicon: Lexicon,
    pub counts: Vec<Vec<u64>>,
    pub period: DateRange,
}

impl MentionMatrix {
    /// 1 where the company mentioned the keyword at least once, else 0.
    pub fn dummy(&self) -> Vec<Vec<u8>> {
        self.counts
            .iter()
            .map(|row| row.iter().map(|&c| u8::from(c >= 1)).collect())
            .collect()
    }

    pub fn column_totals(&self) -> Vec<u64> {
        let mut totals = vec![0; self.lexicon.len()];
        for row in &self.counts {
            for (t, &c) in totals.iter_mut().zip(row) {
                *t += c;
            }
        }
        totals
    }

    /// The chosen view as a real matrix.
    pub fn design<T: Scalar>(&self, view: MatrixView) -> Matrix<T> {
        Matrix::from_fn(self.companies.len(), self.lexicon.len(), |i, j| {
            let c = self.counts[i][j];
            match view {
                MatrixView::Dummy => {
                    if c >= 1 {
                        T::one()
                    } else {
                        T::zero()
                    }
                }
                MatrixView::Count => T::from_u64(c).expect("count representable"),
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixBuild {
    pub matrix: MentionMatrix,
    /// Tickers present in the corpus with no filing inside the period.
    pub excluded: Vec<String>,
}

/// Sums per-filing counts for each company over `period`.
pub fn build_matrix(
    corpus: &CorpusIndex,
    lexicon: &Lexicon,
    period: &DateRange,
) -> Result<MatrixBuild, KeywordError> {
    let scanner = Scanner::new(lexicon, false);
    let in_period = CorpusIndex {
        records: corpus
            .records
            .iter()
            .filter(|r| period.contains(r.filing_date))
            .cloned()
            .collect(),
        source: corpus.source,
        fetched_at: corpus.fetched_at,
    };
    let scans = scan_corpus(&in_period, &scanner)?;
    let all: Vec<String> = corpus.tickers();
    build_matrix_from_scans(&scans, lexicon, period, &all)
}

/// Aggregates already scanned filings. `universe` lists every ticker that
/// should be reported as excluded when it has no filing in `period`.
pub fn build_matrix_from_scans(
    scans: &[ScannedFiling],
    lexicon: &Lexicon,
    period: &DateRange,
    universe: &[String],
) -> Result<MatrixBuild, KeywordError> {
    let mut rows: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for s in scans.iter().filter(|s| period.contains(s.filing_date)) {
        if s.counts.len() != lexicon.len() {
            return Err(KeywordError::Mismatch(format!(
                "{} has {} counts for {} keywords",
                s.accession,
                s.counts.len(),
                lexicon.len()
            )));
        }
        let row = rows.entry(&s.ticker).or_insert_with(|| vec![0; lexicon.len()]);
        for (acc, &c) in row.iter_mut().zip(&s.counts) {
            *acc += c;
        }
    }
    if rows.is_empty() {
        return Err(KeywordError::EmptyAfterFilter(period.to_string()));
    }
    let present: BTreeSet<&str> = rows.keys().copied().collect();
    let excluded: BTreeSet<String> = universe
        .iter()
        .chain(scans.iter().map(|s| &s.ticker))
        .filter(|t| !present.contains(t.as_str()))
        .cloned()
        .collect();
    let (companies, counts): (Vec<String>, Vec<Vec<u64>>) =
        rows.into_iter().map(|(t, c)| (t.to_string(), c)).unzip();
    Ok(MatrixBuild {
        matrix: MentionMatrix {
            companies,
            lexicon: lexicon.clone(),
            counts,
            period: *period,
        },
        excluded: excluded.into_iter().collect(),
    })
}
