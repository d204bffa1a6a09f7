use std::path::PathBuf;

use chrono::NaiveDate;
use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{KeywordError, Lexicon};
use crate::ingest::CorpusIndex;

/// Compiled matcher for one lexicon.
///
/// Matching runs on the lowercased document and counts non-overlapping
/// occurrences left to right. Whitespace inside a phrase matches any run of
/// whitespace. Without `word_boundary`, phrases match inside longer tokens.
#[derive(Clone, Debug)]
pub struct Scanner {
    lexicon: Lexicon,
    patterns: Vec<Regex>,
    word_boundary: bool,
}

impl Scanner {
    pub fn new(lexicon: &Lexicon, word_boundary: bool) -> Self {
        let patterns = lexicon
            .entries()
            .iter()
            .map(|e| {
                let body = e
                    .phrase
                    .split_whitespace()
                    .map(regex::escape)
                    .collect::<Vec<_>>()
                    .join(r"\s+");
                let pat = if word_boundary { format!(r"\b{body}\b") } else { body };
                Regex::new(&pat).expect("escaped phrase is a valid pattern")
            })
            .collect();
        Self {
            lexicon: lexicon.clone(),
            patterns,
            word_boundary,
        }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn word_boundary(&self) -> bool {
        self.word_boundary
    }

    /// Per-keyword occurrence counts, in lexicon order.
    pub fn scan(&self, text: &str) -> Vec<u64> {
        let lower = text.to_lowercase();
        self.patterns
            .iter()
            .map(|re| re.find_iter(&lower).count() as u64)
            .collect()
    }
}

/// Counts each lexicon phrase in `text` (substring semantics).
pub fn scan_text(text: &str, lexicon: &Lexicon) -> Vec<u64> {
    Scanner::new(lexicon, false).scan(text)
}

/// Keyword counts of one filing together with its facet attributes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScannedFiling {
    pub ticker: String,
    pub accession: String,
    pub form_type: String,
    pub filing_date: NaiveDate,
    pub sic_industry: String,
    pub state_of_incorporation: String,
    pub counts: Vec<u64>,
}

/// Scans every filing in parallel; output follows corpus order.
pub fn scan_corpus(corpus: &CorpusIndex, scanner: &Scanner) -> Result<Vec<ScannedFiling>, KeywordError> {
    corpus
        .records
        .par_iter()
        .map(|r| {
            let bytes = std::fs::read(&r.text_path).map_err(|source| KeywordError::Io {
                path: PathBuf::from(&r.text_path).display().to_string(),
                source,
            })?;
            let text = String::from_utf8_lossy(&bytes);
            Ok(ScannedFiling {
                ticker: r.ticker.clone(),
                accession: r.accession.clone(),
                form_type: r.form_type.clone(),
                filing_date: r.filing_date,
                sic_industry: r.sic_industry.clone(),
                state_of_incorporation: r.state_of_incorporation.clone(),
                counts: scanner.scan(&text),
            })
        })
        .collect()
}
