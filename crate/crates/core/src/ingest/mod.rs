//! Filing acquisition: the on-disk corpus index, the local cache, and the
//! EDGAR client.

mod cache;
pub mod edgar;
pub mod markup;
pub mod ratelimit;
pub mod transport;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Datelike, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{write_atomic, Cache};
pub use edgar::{CikLookup, Fetcher, FetchStats, RemoteSource};
pub use ratelimit::{Clock, ManualClock, RateLimiter, SystemClock};
pub use transport::{HttpResponse, Transport, TransportError};

pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: malformed index: {message}")]
    IndexParse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid record {accession}: {message}")]
    InvalidRecord { accession: String, message: String },
    #[error("duplicate accession {0} in corpus index")]
    DuplicateAccession(String),
    #[error("filing text missing: {0}")]
    MissingText(PathBuf),
    #[error("filing text empty: {0}")]
    EmptyText(PathBuf),
    #[error("network error fetching {url}: {message} (retryable)")]
    Network { url: String, message: String },
    #[error("rate limited by server on {url} (HTTP {status}, retry after {retry_after:?}s)")]
    RateLimited {
        url: String,
        status: u16,
        retry_after: Option<u64>,
    },
    #[error("HTTP {status} fetching {url}")]
    Http { url: String, status: u16 },
    #[error("unexpected response from {url}: {message}")]
    Decode { url: String, message: String },
}

impl IngestError {
    /// Errors caused by the network or the remote server.
    pub fn is_network(&self) -> bool {
        matches!(
            self,
            IngestError::Network { .. } | IngestError::RateLimited { .. } | IngestError::Http { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.into(),
            source,
        }
    }
}

/// One filing's primary document plus the metadata used for facets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilingRecord {
    pub ticker: String,
    /// Zero-padded, 10 digits.
    pub cik: String,
    pub accession: String,
    pub form_type: String,
    pub filing_date: NaiveDate,
    pub filing_year: i32,
    pub sic_industry: String,
    /// Two-letter code, or empty when unknown.
    pub state_of_incorporation: String,
    /// Absolute (or root-joined) path to the cached plain text.
    pub text_path: PathBuf,
}

impl FilingRecord {
    fn sort_key(&self) -> (&str, NaiveDate, &str) {
        (&self.ticker, self.filing_date, &self.accession)
    }

    /// Cache-relative location `<cik>/<accession>.txt`.
    pub fn relative_text_path(cik: &str, accession: &str) -> PathBuf {
        Path::new(cik).join(format!("{accession}.txt"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Remote,
    Local,
}

/// Immutable, deterministically ordered set of filings.
#[derive(Clone, Debug)]
pub struct CorpusIndex {
    pub records: Vec<FilingRecord>,
    pub source: SourceKind,
    pub fetched_at: Option<DateTime<Utc>>,
}

impl CorpusIndex {
    /// Sorts by `(ticker, filing_date, accession)` and rejects duplicate
    /// accessions.
    pub fn new(
        mut records: Vec<FilingRecord>,
        source: SourceKind,
        fetched_at: Option<DateTime<Utc>>,
    ) -> Result<Self, IngestError> {
        records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut seen = BTreeSet::new();
        for r in &records {
            if !seen.insert(r.accession.as_str()) {
                return Err(IngestError::DuplicateAccession(r.accession.clone()));
            }
        }
        Ok(Self {
            records,
            source,
            fetched_at,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct tickers in sorted order.
    pub fn tickers(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.records.iter().map(|r| r.ticker.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }

    /// Keeps records whose ticker is in `tickers`; an empty list keeps all.
    pub fn filter_tickers(&self, tickers: &[String]) -> CorpusIndex {
        if tickers.is_empty() {
            return self.clone();
        }
        let wanted: BTreeSet<String> = tickers.iter().map(|t| t.to_uppercase()).collect();
        CorpusIndex {
            records: self
                .records
                .iter()
                .filter(|r| wanted.contains(&r.ticker))
                .cloned()
                .collect(),
            source: self.source,
            fetched_at: self.fetched_at,
        }
    }

    /// Serialized `index.json` with text paths relative to `root`.
    pub fn to_index_json(&self, root: &Path) -> String {
        let file = IndexFile {
            records: self
                .records
                .iter()
                .map(|r| IndexEntry::from_record(r, root))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("index serializes");
        s.push('\n');
        s
    }
}

/// `index.json` row. `text_path` is relative to the corpus root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub ticker: String,
    pub cik: String,
    pub accession: String,
    pub form_type: String,
    pub filing_date: NaiveDate,
    #[serde(default)]
    pub sic_industry: String,
    #[serde(default)]
    pub state_of_incorporation: String,
    pub text_path: String,
}

impl IndexEntry {
    fn from_record(r: &FilingRecord, root: &Path) -> Self {
        let rel = r.text_path.strip_prefix(root).unwrap_or(&r.text_path);
        Self {
            ticker: r.ticker.clone(),
            cik: r.cik.clone(),
            accession: r.accession.clone(),
            form_type: r.form_type.clone(),
            filing_date: r.filing_date,
            sic_industry: r.sic_industry.clone(),
            state_of_incorporation: r.state_of_incorporation.clone(),
            // forward slashes keep index files portable
            text_path: rel.to_string_lossy().replace('\\', "/"),
        }
    }

    fn into_record(self, root: &Path) -> Result<FilingRecord, IngestError> {
        let invalid = |message: String| IngestError::InvalidRecord {
            accession: self.accession.clone(),
            message,
        };
        let ticker = self.ticker.trim().to_uppercase();
        if ticker.is_empty() {
            return Err(invalid("blank ticker".into()));
        }
        let cik = normalize_cik(&self.cik).ok_or_else(|| invalid(format!("bad CIK '{}'", self.cik)))?;
        if self.accession.trim().is_empty() {
            return Err(invalid("blank accession".into()));
        }
        let state = self.state_of_incorporation.trim().to_uppercase();
        if !(state.is_empty() || state.len() == 2) {
            return Err(invalid(format!("state of incorporation '{state}' is not a 2-letter code")));
        }
        Ok(FilingRecord {
            ticker,
            cik,
            accession: self.accession.trim().to_string(),
            form_type: self.form_type.trim().to_string(),
            filing_year: self.filing_date.year(),
            filing_date: self.filing_date,
            sic_industry: self.sic_industry.trim().to_string(),
            state_of_incorporation: state,
            text_path: root.join(&self.text_path),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexFile {
    pub records: Vec<IndexEntry>,
}

/// Pads a numeric CIK to 10 digits; `None` if not 1 to 10 ASCII digits.
pub fn normalize_cik(raw: &str) -> Option<String> {
    let raw = raw.trim();
    if raw.is_empty() || raw.len() > 10 || !raw.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(format!("{raw:0>10}"))
}

/// Loads `<root>/index.json` and checks that every referenced text exists and
/// is non-empty.
pub fn load_local_corpus(root: &Path) -> Result<CorpusIndex, IngestError> {
    let path = root.join(INDEX_FILE);
    let raw = fs::read_to_string(&path).map_err(|e| IngestError::io(&path, e))?;
    let file: IndexFile = serde_json::from_str(&raw).map_err(|e| IngestError::IndexParse {
        path: path.clone(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let records = file
        .records
        .into_iter()
        .map(|e| e.into_record(root))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &records {
        match fs::metadata(&r.text_path) {
            Ok(m) if m.len() == 0 => return Err(IngestError::EmptyText(r.text_path.clone())),
            Ok(_) => {}
            Err(_) => return Err(IngestError::MissingText(r.text_path.clone())),
        }
    }
    CorpusIndex::new(records, SourceKind::Local, None)
}
