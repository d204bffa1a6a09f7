//! ESG lexicon, document scanning, the company x keyword matrix and facet
//! aggregations.

mod facets;
mod lexicon;
mod matrix;
mod scan;

use thiserror::Error;

pub use facets::{facet_breakdown, Facet, FacetCell, FacetTable};
pub use lexicon::{sasb_categories, Lexicon, LexiconEntry, SasbCategory};
pub use matrix::{build_matrix, build_matrix_from_scans, MatrixBuild, MatrixView, MentionMatrix};
pub use scan::{scan_corpus, scan_text, ScannedFiling, Scanner};

#[derive(Debug, Error)]
pub enum KeywordError {
    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no filings fall inside {0}")]
    EmptyAfterFilter(String),
    #[error("scan results do not match the lexicon ({0})")]
    Mismatch(String),
}
