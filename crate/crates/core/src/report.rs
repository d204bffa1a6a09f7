//! Rendering of pipeline outputs: publication-style markdown for people and
//! full-precision CSV for machines.
//!
//! Human tables use fixed precision (4-decimal coefficients, 3-decimal
//! t-statistics, 3-decimal explained variance, integer-percent correlations).
//! CSV output uses the shortest representation that parses back to the same
//! value.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::keywords::{FacetTable, MentionMatrix};
use crate::market::{CrossSectionSummary, MomentStats};
use crate::regression::{flag_for_p, CorrelationTable, RegressionResult, Significance, INTERCEPT};
use crate::spectral::{FactorCorrelation, FactorSet, SvdResult};
use crate::Scalar;

/// One rendered file of a report bundle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub name: String,
    pub format: String,
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub run_config_snapshot: serde_json::Value,
    pub tables: Vec<TableEntry>,
    pub timestamp: Option<String>,
}

impl ReportBundle {
    pub fn missing_tables(&self, root: &Path) -> Vec<PathBuf> {
        self.tables
            .iter()
            .map(|t| root.join(&t.path))
            .filter(|p| !p.is_file())
            .collect()
    }
}

fn csv_string(rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("flush in-memory CSV")).expect("UTF-8 CSV")
}

fn full<T: Scalar>(v: T) -> String {
    format!("{v}")
}

fn opt_full<T: Scalar>(v: Option<T>) -> String {
    v.map(full).unwrap_or_default()
}

/// `coef (t)` with bold for 90% significance and a `***` suffix for 99%,
/// e.g. `**0.0029 (4.045)***`.
pub fn format_coefficient_cell<T: Scalar>(coef: T, t: Option<T>, flag: Significance) -> String {
    let t = match t {
        Some(t) => format!("{:.3}", t.to_f64_lossy()),
        None => "n/a".to_string(),
    };
    let base = format!("{:.4} ({t})", coef.to_f64_lossy());
    match flag {
        Significance::None => base,
        Significance::Significant => format!("**{base}**"),
        Significance::HighlySignificant => format!("**{base}***"),
    }
}

/// Markdown table with one column per regression and one row per term of
/// `row_labels` (the intercept is appended when missing). Terms a regression
/// dropped render as `dropped`. The last row carries adjusted R-squared.
pub fn render_regression_markdown<T: Scalar>(
    results: &[RegressionResult<T>],
    column_headers: &[String],
    row_labels: &[String],
    confidence: f64,
) -> String {
    assert_eq!(results.len(), column_headers.len(), "one header per result");
    let mut out = String::new();
    let _ = write!(out, "|");
    for h in std::iter::once("").chain(column_headers.iter().map(String::as_str)) {
        let _ = write!(out, " {h} |");
    }
    out.push('\n');
    out.push('|');
    for _ in 0..=results.len() {
        out.push_str("---|");
    }
    out.push('\n');
    if results.is_empty() {
        return out;
    }
    let mut rows: Vec<&str> = row_labels.iter().map(String::as_str).collect();
    if !rows.contains(&INTERCEPT) {
        rows.push(INTERCEPT);
    }
    for label in rows {
        let _ = write!(out, "| {label} |");
        for r in results {
            let cell = match r.term_index(label) {
                Some(i) => format_coefficient_cell(
                    r.coefficients[i],
                    r.t_stats[i],
                    flag_for_p(r.p_values[i], confidence),
                ),
                None => "dropped".to_string(),
            };
            let _ = write!(out, " {cell} |");
        }
        out.push('\n');
    }
    let _ = write!(out, "| Model Adj. R2 |");
    for r in results {
        let _ = write!(out, " {:.1}% |", r.adj_r_squared.to_f64_lossy() * 100.0);
    }
    out.push('\n');
    out
}

pub const REGRESSION_CSV_HEADER: [&str; 5] = ["term", "coef", "t_stat", "p_value", "flag"];

/// `term,coef,t_stat,p_value,flag` rows followed by `R2`, `Adj. R2` and `N`
/// summary rows (value in the `coef` column).
pub fn render_regression_csv<T: Scalar>(result: &RegressionResult<T>, confidence: f64) -> String {
    let mut rows = vec![REGRESSION_CSV_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for i in 0..result.term_labels.len() {
        rows.push(vec![
            result.term_labels[i].clone(),
            full(result.coefficients[i]),
            opt_full(result.t_stats[i]),
            opt_full(result.p_values[i]),
            flag_for_p(result.p_values[i], confidence).label().to_string(),
        ]);
    }
    let summary = |name: &str, v: String| vec![name.to_string(), v, String::new(), String::new(), String::new()];
    rows.push(summary("R2", full(result.r_squared)));
    rows.push(summary("Adj. R2", full(result.adj_r_squared)));
    rows.push(summary("N", result.n_obs.to_string()));
    csv_string(rows)
}

/// `k,singular_value,var_explained,cumulative`, with `k` starting at 0.
pub fn render_scree<T: Scalar>(svd: &SvdResult<T>) -> String {
    let ve = svd.explained_variance().unwrap_or_else(|_| vec![T::zero(); svd.s.len()]);
    let mut cumulative = T::zero();
    let mut rows = vec![vec![
        "k".to_string(),
        "singular_value".into(),
        "var_explained".into(),
        "cumulative".into(),
    ]];
    for (k, (&s, &v)) in svd.s.iter().zip(&ve).enumerate() {
        cumulative += v;
        rows.push(vec![k.to_string(), full(s), full(v), full(cumulative)]);
    }
    csv_string(rows)
}

/// Space-separated values in brackets, e.g. `[0.592 0.071 0.053]`.
pub fn bracketed<T: Scalar>(values: &[T], decimals: usize) -> String {
    let body: Vec<String> = values
        .iter()
        .map(|v| format!("{:.*}", decimals, v.to_f64_lossy()))
        .collect();
    format!("[{}]", body.join(" "))
}

/// `var_explained = [...]` listing at three decimals.
pub fn render_var_explained<T: Scalar>(var_explained: &[T]) -> String {
    format!("var_explained = {}\n", bracketed(var_explained, 3))
}

/// Long-format `facet_value,keyword,count,share_pct`, sorted by count
/// descending, then keyword, then facet value.
pub fn render_facets(table: &FacetTable) -> String {
    let mut cells: Vec<_> = table.cells.iter().collect();
    cells.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.keyword.cmp(&b.keyword))
            .then_with(|| a.facet_value.cmp(&b.facet_value))
    });
    let mut rows = vec![vec![
        "facet_value".to_string(),
        "keyword".into(),
        "count".into(),
        "share_pct".into(),
    ]];
    rows.extend(cells.into_iter().map(|c| {
        vec![
            c.facet_value.clone(),
            c.keyword.clone(),
            c.count.to_string(),
            full(c.share_pct),
        ]
    }));
    csv_string(rows)
}

/// Correlation matrix as CSV; integer percents when `rounded`, else full
/// precision. Undefined cells are `NA`.
pub fn render_correlation_csv<T: Scalar>(table: &CorrelationTable<T>, rounded: bool) -> String {
    let mut rows = vec![std::iter::once(String::new()).chain(table.labels.iter().cloned()).collect::<Vec<_>>()];
    for (i, label) in table.labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        for j in 0..table.labels.len() {
            row.push(if rounded {
                table.display_cell(i, j)
            } else {
                table.matrix[i][j].map(full).unwrap_or_else(|| "NA".into())
            });
        }
        rows.push(row);
    }
    csv_string(rows)
}

pub fn render_correlation_markdown<T: Scalar>(table: &CorrelationTable<T>) -> String {
    let mut out = String::from("|");
    for h in std::iter::once("").chain(table.labels.iter().map(String::as_str)) {
        let _ = write!(out, " {h} |");
    }
    out.push_str("\n|");
    for _ in 0..=table.labels.len() {
        out.push_str("---|");
    }
    out.push('\n');
    for (i, label) in table.labels.iter().enumerate() {
        let _ = write!(out, "| {label} |");
        for j in 0..table.labels.len() {
            let _ = write!(out, " {} |", table.display_cell(i, j));
        }
        out.push('\n');
    }
    out
}

/// Percent with one decimal, e.g. `91.4%`.
pub fn percent_1dp<T: Scalar>(fraction: T) -> String {
    format!("{:.1}%", fraction.to_f64_lossy() * 100.0)
}

/// Features as rows, factors as columns, percentages at one decimal.
pub fn render_factor_correlation_markdown<T: Scalar>(corr: &FactorCorrelation<T>) -> String {
    let mut out = String::from("| Feature |");
    for f in &corr.factor_labels {
        let _ = write!(out, " {f} |");
    }
    out.push_str("\n|");
    for _ in 0..=corr.factor_labels.len() {
        out.push_str("---|");
    }
    out.push('\n');
    for (j, feature) in corr.feature_labels.iter().enumerate() {
        let _ = write!(out, "| {feature} |");
        for k in 0..corr.factor_labels.len() {
            let cell = corr.values[k][j].map(percent_1dp).unwrap_or_else(|| "NA".into());
            let _ = write!(out, " {cell} |");
        }
        out.push('\n');
    }
    out
}

pub fn render_factor_correlation_csv<T: Scalar>(corr: &FactorCorrelation<T>) -> String {
    let mut rows = vec![std::iter::once("feature".to_string())
        .chain(corr.factor_labels.iter().cloned())
        .collect::<Vec<_>>()];
    for (j, feature) in corr.feature_labels.iter().enumerate() {
        let mut row = vec![feature.clone()];
        row.extend((0..corr.factor_labels.len()).map(|k| corr.values[k][j].map(full).unwrap_or_else(|| "NA".into())));
        rows.push(row);
    }
    csv_string(rows)
}

/// `ticker,F0,F1,...`.
pub fn render_factors<T: Scalar>(tickers: &[String], factors: &FactorSet<T>) -> String {
    let mut rows = vec![std::iter::once("ticker".to_string()).chain(factors.labels()).collect::<Vec<_>>()];
    for (i, t) in tickers.iter().enumerate() {
        let mut row = vec![t.clone()];
        row.extend(factors.factors.row(i).iter().map(|&v| full(v)));
        rows.push(row);
    }
    csv_string(rows)
}

/// Feature coefficients of the leading right singular vectors, one column per
/// vector, features in lexicon order.
pub fn render_composition<T: Scalar>(svd: &SvdResult<T>, labels: &[String], k: usize) -> String {
    let k = k.min(svd.s.len());
    let mut rows = vec![std::iter::once("feature".to_string())
        .chain((0..k).map(|i| format!("V[{i}]")))
        .collect::<Vec<_>>()];
    for (j, l) in labels.iter().enumerate() {
        let mut row = vec![l.clone()];
        row.extend((0..k).map(|i| full(svd.v[(j, i)])));
        rows.push(row);
    }
    csv_string(rows)
}

/// `ticker,<label1>,...` with raw counts, or the 0/1 view when `dummy`.
pub fn render_mention_matrix(m: &MentionMatrix, dummy: bool) -> String {
    let mut rows = vec![std::iter::once("ticker".to_string()).chain(m.lexicon.labels()).collect::<Vec<_>>()];
    let dummies = m.dummy();
    for (i, t) in m.companies.iter().enumerate() {
        let mut row = vec![t.clone()];
        if dummy {
            row.extend(dummies[i].iter().map(|v| v.to_string()));
        } else {
            row.extend(m.counts[i].iter().map(|v| v.to_string()));
        }
        rows.push(row);
    }
    csv_string(rows)
}

pub fn render_moments<T: Scalar>(stats: &[MomentStats<T>]) -> String {
    let mut rows = vec![["ticker", "mean", "std", "skewness", "kurtosis", "n_obs"]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
    for s in stats {
        rows.push(vec![
            s.ticker.clone(),
            full(s.mean),
            full(s.std),
            opt_full(s.skewness),
            opt_full(s.kurtosis),
            s.n_obs.to_string(),
        ]);
    }
    csv_string(rows)
}

/// Cross-section summary as a describe-style table:
/// `Metric,E[R],Std[R],Skewness[R],Kurtosis[R]` then `Count ... max`.
pub fn render_summary_csv<T: Scalar>(summary: &CrossSectionSummary<T>) -> String {
    summary_rows(summary, |_, v| full(v))
}

/// Same layout at display precision: returns and volatilities in percent
/// with three decimals, higher moments with three decimals.
pub fn render_summary_markdown<T: Scalar>(summary: &CrossSectionSummary<T>) -> String {
    let rows = summary_rows_raw(summary, |col, v| {
        let v = v.to_f64_lossy();
        if col < 2 {
            format!("{:.3}%", v * 100.0)
        } else {
            format!("{v:.3}")
        }
    });
    let mut out = String::new();
    for (i, r) in rows.iter().enumerate() {
        out.push_str("| ");
        out.push_str(&r.join(" | "));
        out.push_str(" |\n");
        if i == 0 {
            out.push('|');
            for _ in r {
                out.push_str("---|");
            }
            out.push('\n');
        }
    }
    out
}

fn summary_rows<T: Scalar>(summary: &CrossSectionSummary<T>, fmt: impl Fn(usize, T) -> String) -> String {
    csv_string(summary_rows_raw(summary, fmt))
}

fn summary_rows_raw<T: Scalar>(
    summary: &CrossSectionSummary<T>,
    fmt: impl Fn(usize, T) -> String,
) -> Vec<Vec<String>> {
    let mut rows = vec![std::iter::once("Metric".to_string())
        .chain(summary.columns.iter().map(|c| c.moment.label().to_string()))
        .collect::<Vec<_>>()];
    for (r, label) in CrossSectionSummary::<T>::row_labels().into_iter().enumerate() {
        let mut row = vec![label];
        for (ci, c) in summary.columns.iter().enumerate() {
            row.push(match r {
                0 => c.count.to_string(),
                1 => fmt(ci, c.mean),
                2 => fmt(ci, c.std),
                3 => fmt(ci, c.min),
                r if r == 4 + c.percentiles.len() => fmt(ci, c.max),
                r => fmt(ci, c.percentiles[r - 4]),
            });
        }
        rows.push(row);
    }
    rows
}
