//! EDGAR client and local-mirror fetcher sharing one cache.
//!
//! Remote mode talks to three endpoints: the public company-ticker table, the
//! per-registrant submissions listing, and the archive path of each filing's
//! primary document. Every response is cached, so a repeated fetch over the
//! same range performs no network calls.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{Datelike, NaiveDate, Utc};
use log::{info, warn};
use serde::Deserialize;

use super::markup::strip_markup;
use super::ratelimit::RateLimiter;
use super::transport::Transport;
use super::{normalize_cik, Cache, CorpusIndex, FilingRecord, IngestError, SourceKind};
use crate::period::DateRange;

pub const TICKER_TABLE_URL: &str = "https://www.sec.gov/files/company_tickers.json";
pub const SUBMISSIONS_URL: &str = "https://data.sec.gov/submissions";
pub const ARCHIVES_URL: &str = "https://www.sec.gov/Archives/edgar/data";

/// Environment variable holding the declared User-Agent contact string.
pub const USER_AGENT_ENV: &str = "EDGAR_USER_AGENT";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CikLookup {
    Resolved(String),
    Unresolved,
}

impl CikLookup {
    pub fn cik(&self) -> Option<&str> {
        match self {
            CikLookup::Resolved(c) => Some(c),
            CikLookup::Unresolved => None,
        }
    }
}

/// Counters for one fetcher's lifetime.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FetchStats {
    pub network_calls: usize,
    pub cache_hits: usize,
    pub skipped_entries: usize,
}

pub struct RemoteSource {
    transport: Arc<dyn Transport>,
    limiter: Arc<RateLimiter>,
    user_agent: String,
    max_retries: u32,
    parallelism: usize,
}

impl RemoteSource {
    /// A declared User-Agent is mandatory for EDGAR access.
    pub fn new(
        transport: Arc<dyn Transport>,
        limiter: Arc<RateLimiter>,
        user_agent: &str,
    ) -> Result<Self, IngestError> {
        if user_agent.trim().is_empty() {
            return Err(IngestError::Precondition(format!(
                "a User-Agent contact string is required (set {USER_AGENT_ENV})"
            )));
        }
        Ok(Self {
            transport,
            limiter,
            user_agent: user_agent.trim().to_string(),
            max_retries: 3,
            parallelism: 4,
        })
    }

    pub fn with_max_retries(mut self, retries: u32) -> Self {
        self.max_retries = retries;
        self
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism.max(1);
        self
    }
}

enum Source {
    Remote(RemoteSource),
    Mirror(CorpusIndex),
}

/// Fetches filings from EDGAR or a local mirror into a [`Cache`].
pub struct Fetcher {
    source: Source,
    cache: Cache,
    network_calls: AtomicUsize,
    cache_hits: AtomicUsize,
    skipped: AtomicUsize,
}

#[derive(Deserialize)]
struct TickerRow {
    cik_str: u64,
    ticker: String,
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "camelCase")]
struct Submissions {
    #[serde(default)]
    sic_description: Option<String>,
    #[serde(default)]
    state_of_incorporation: Option<String>,
    #[serde(default)]
    filings: SubmissionFilings,
}

#[derive(Deserialize, Default)]
struct SubmissionFilings {
    #[serde(default)]
    recent: RecentFilings,
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "camelCase")]
struct RecentFilings {
    #[serde(default)]
    accession_number: Vec<serde_json::Value>,
    #[serde(default)]
    filing_date: Vec<serde_json::Value>,
    #[serde(default)]
    form: Vec<serde_json::Value>,
    #[serde(default)]
    primary_document: Vec<serde_json::Value>,
}

struct PendingDoc {
    record: FilingRecord,
    url: String,
}

impl Fetcher {
    pub fn remote(source: RemoteSource, cache: Cache) -> Self {
        Self::with_source(Source::Remote(source), cache)
    }

    /// Serves filings from an existing corpus directory instead of the network.
    pub fn mirror(mirror: CorpusIndex, cache: Cache) -> Self {
        Self::with_source(Source::Mirror(mirror), cache)
    }

    fn with_source(source: Source, cache: Cache) -> Self {
        Self {
            source,
            cache,
            network_calls: AtomicUsize::new(0),
            cache_hits: AtomicUsize::new(0),
            skipped: AtomicUsize::new(0),
        }
    }

    pub fn cache(&self) -> &Cache {
        &self.cache
    }

    pub fn stats(&self) -> FetchStats {
        FetchStats {
            network_calls: self.network_calls.load(Ordering::SeqCst),
            cache_hits: self.cache_hits.load(Ordering::SeqCst),
            skipped_entries: self.skipped.load(Ordering::SeqCst),
        }
    }

    /// Maps each ticker to its zero-padded CIK. Tickers that the registry does
    /// not know are returned as [`CikLookup::Unresolved`].
    pub fn resolve_ciks(&self, tickers: &[String]) -> Result<BTreeMap<String, CikLookup>, IngestError> {
        if tickers.is_empty() {
            return Err(IngestError::Precondition("ticker list is empty".into()));
        }
        if let Some(blank) = tickers.iter().find(|t| t.trim().is_empty()) {
            return Err(IngestError::Precondition(format!("blank ticker '{blank}'")));
        }
        let table: BTreeMap<String, String> = match &self.source {
            Source::Mirror(index) => index
                .records
                .iter()
                .map(|r| (r.ticker.clone(), r.cik.clone()))
                .collect(),
            Source::Remote(remote) => {
                let path = self.cache.ticker_table_path();
                let body = match self.cache.read(&path) {
                    Some(b) => {
                        self.cache_hits.fetch_add(1, Ordering::SeqCst);
                        b
                    }
                    None => {
                        let b = self.get(remote, TICKER_TABLE_URL)?;
                        self.cache.store(&path, &b)?;
                        b
                    }
                };
                parse_ticker_table(&body)?
            }
        };
        Ok(tickers
            .iter()
            .map(|t| {
                let key = t.trim().to_uppercase();
                let lookup = table
                    .get(&key)
                    .map(|c| CikLookup::Resolved(c.clone()))
                    .unwrap_or(CikLookup::Unresolved);
                (key, lookup)
            })
            .collect())
    }

    /// Fetches (or reuses from cache) every filing of `cik` dated inside
    /// `range` whose form type is in `forms` (all forms when `None`).
    pub fn fetch_filings(
        &self,
        ticker: &str,
        cik: &str,
        range: &DateRange,
        forms: Option<&BTreeSet<String>>,
    ) -> Result<Vec<FilingRecord>, IngestError> {
        let cik = normalize_cik(cik).ok_or_else(|| IngestError::Precondition(format!("invalid CIK '{cik}'")))?;
        if range.start > range.end {
            return Err(IngestError::Precondition(format!("date range {range} is reversed")));
        }
        let ticker = ticker.trim().to_uppercase();
        let form_ok = |f: &str| forms.map_or(true, |set| set.contains(f));
        match &self.source {
            Source::Mirror(index) => {
                let mut out = Vec::new();
                for r in index.records.iter().filter(|r| {
                    r.cik == cik && range.contains(r.filing_date) && form_ok(&r.form_type)
                }) {
                    let dest = self.cache.text_path(&cik, &r.accession);
                    if self.cache.has(&dest) {
                        self.cache_hits.fetch_add(1, Ordering::SeqCst);
                    } else {
                        let bytes = fs::read(&r.text_path).map_err(|e| IngestError::io(&r.text_path, e))?;
                        self.cache.store(&dest, &bytes)?;
                    }
                    out.push(FilingRecord {
                        text_path: dest,
                        ..r.clone()
                    });
                }
                Ok(out)
            }
            Source::Remote(remote) => {
                let subs = self.submissions(remote, &cik)?;
                let pending = self.pending_docs(&ticker, &cik, &subs, range, &form_ok);
                self.download(remote, pending)
            }
        }
    }

    /// Fetches every ticker, writes `index.json` (merged with any existing
    /// cache index) and returns the merged corpus plus unresolved tickers.
    pub fn fetch_all(
        &self,
        tickers: &[String],
        range: &DateRange,
        forms: Option<&BTreeSet<String>>,
    ) -> Result<(CorpusIndex, Vec<String>), IngestError> {
        let ciks = self.resolve_ciks(tickers)?;
        let mut records = Vec::new();
        let mut unresolved = Vec::new();
        for (ticker, lookup) in &ciks {
            match lookup {
                CikLookup::Resolved(cik) => records.extend(self.fetch_filings(ticker, cik, range, forms)?),
                CikLookup::Unresolved => {
                    warn!("ticker {ticker} not found in EDGAR ticker table");
                    unresolved.push(ticker.clone());
                }
            }
        }
        let index_path = self.cache.index_path();
        if self.cache.has(&index_path) {
            let existing = super::load_local_corpus(self.cache.root())?;
            let fresh: BTreeSet<String> = records.iter().map(|r| r.accession.clone()).collect();
            records.extend(existing.records.into_iter().filter(|r| !fresh.contains(&r.accession)));
        }
        let kind = match self.source {
            Source::Remote(_) => SourceKind::Remote,
            Source::Mirror(_) => SourceKind::Local,
        };
        let index = CorpusIndex::new(records, kind, Some(Utc::now()))?;
        let json = index.to_index_json(self.cache.root());
        let unchanged = fs::read(&index_path).map(|b| b == json.as_bytes()).unwrap_or(false);
        if !unchanged {
            self.cache.store(&index_path, json.as_bytes())?;
        }
        Ok((index, unresolved))
    }

    fn submissions(&self, remote: &RemoteSource, cik: &str) -> Result<Submissions, IngestError> {
        let path = self.cache.submissions_path(cik);
        let url = format!("{SUBMISSIONS_URL}/CIK{cik}.json");
        let body = match self.cache.read(&path) {
            Some(b) => {
                self.cache_hits.fetch_add(1, Ordering::SeqCst);
                b
            }
            None => {
                let b = self.get(remote, &url)?;
                self.cache.store(&path, &b)?;
                b
            }
        };
        serde_json::from_slice(&body).map_err(|e| IngestError::Decode {
            url,
            message: e.to_string(),
        })
    }

    fn pending_docs(
        &self,
        ticker: &str,
        cik: &str,
        subs: &Submissions,
        range: &DateRange,
        form_ok: &dyn Fn(&str) -> bool,
    ) -> Vec<PendingDoc> {
        let recent = &subs.filings.recent;
        let n = recent.accession_number.len();
        let industry = subs.sic_description.clone().unwrap_or_default();
        let state = subs
            .state_of_incorporation
            .clone()
            .unwrap_or_default()
            .trim()
            .to_uppercase();
        let state = if state.len() == 2 { state } else { String::new() };
        let cik_num = cik.trim_start_matches('0');
        let mut out = Vec::new();
        for i in 0..n {
            fn field(v: &[serde_json::Value], i: usize) -> &str {
                v.get(i).and_then(|x| x.as_str()).map(str::trim).unwrap_or("")
            }
            let accession = field(&recent.accession_number, i);
            let date_raw = field(&recent.filing_date, i);
            let form = field(&recent.form, i);
            let doc = field(&recent.primary_document, i);
            let date = NaiveDate::parse_from_str(date_raw, "%Y-%m-%d");
            let (Ok(date), false, false, false) = (date, accession.is_empty(), form.is_empty(), doc.is_empty()) else {
                warn!("{ticker}: skipping malformed index entry {i} ({accession:?}, {date_raw:?}, {form:?}, {doc:?})");
                self.skipped.fetch_add(1, Ordering::SeqCst);
                continue;
            };
            if !range.contains(date) || !form_ok(form) {
                continue;
            }
            out.push(PendingDoc {
                url: format!("{ARCHIVES_URL}/{cik_num}/{}/{doc}", accession.replace('-', "")),
                record: FilingRecord {
                    ticker: ticker.to_string(),
                    cik: cik.to_string(),
                    accession: accession.to_string(),
                    form_type: form.to_string(),
                    filing_date: date,
                    filing_year: date.year(),
                    sic_industry: industry.clone(),
                    state_of_incorporation: state.clone(),
                    text_path: self.cache.text_path(cik, accession),
                },
            });
        }
        out
    }

    fn download(&self, remote: &RemoteSource, pending: Vec<PendingDoc>) -> Result<Vec<FilingRecord>, IngestError> {
        let next = AtomicUsize::new(0);
        let first_error: Mutex<Option<IngestError>> = Mutex::new(None);
        let workers = remote.parallelism.min(pending.len()).max(1);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    if first_error.lock().unwrap().is_some() {
                        return;
                    }
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(doc) = pending.get(i) else { return };
                    if let Err(e) = self.download_one(remote, doc) {
                        first_error.lock().unwrap().get_or_insert(e);
                        return;
                    }
                });
            }
        });
        if let Some(e) = first_error.into_inner().unwrap() {
            return Err(e);
        }
        Ok(pending.into_iter().map(|d| d.record).collect())
    }

    fn download_one(&self, remote: &RemoteSource, doc: &PendingDoc) -> Result<(), IngestError> {
        let path = &doc.record.text_path;
        if self.cache.has(path) {
            self.cache_hits.fetch_add(1, Ordering::SeqCst);
            return Ok(());
        }
        let body = self.get(remote, &doc.url)?;
        let text = strip_markup(&String::from_utf8_lossy(&body));
        if text.trim().is_empty() {
            warn!("{}: primary document is empty after markup removal", doc.record.accession);
        }
        // an empty file would read as a cache miss forever; keep one byte
        let text = if text.is_empty() { "\n".to_string() } else { text };
        self.cache.store(path, text.as_bytes())?;
        info!("cached {}", path.display());
        Ok(())
    }

    /// Rate-limited GET with retry on throttling and transport failures.
    fn get(&self, remote: &RemoteSource, url: &str) -> Result<Vec<u8>, IngestError> {
        let clock = remote.limiter.clock().clone();
        let mut attempt = 0u32;
        loop {
            remote.limiter.acquire();
            self.network_calls.fetch_add(1, Ordering::SeqCst);
            let err = match remote.transport.get(url, &remote.user_agent) {
                Ok(resp) if (200..300).contains(&resp.status) => return Ok(resp.body),
                Ok(resp) if resp.status == 403 || resp.status == 429 => IngestError::RateLimited {
                    url: url.to_string(),
                    status: resp.status,
                    retry_after: resp.retry_after,
                },
                Ok(resp) if resp.status >= 500 => IngestError::Network {
                    url: url.to_string(),
                    message: format!("server error {}", resp.status),
                },
                Ok(resp) => {
                    return Err(IngestError::Http {
                        url: url.to_string(),
                        status: resp.status,
                    })
                }
                Err(e) => IngestError::Network {
                    url: url.to_string(),
                    message: e.0,
                },
            };
            if attempt >= remote.max_retries {
                return Err(err);
            }
            let backoff = match &err {
                IngestError::RateLimited {
                    retry_after: Some(s), ..
                } => Duration::from_secs(*s),
                _ => Duration::from_secs(1u64 << attempt.min(6)),
            };
            warn!("{err}; retrying in {backoff:?}");
            clock.sleep(backoff);
            attempt += 1;
        }
    }
}

fn parse_ticker_table(body: &[u8]) -> Result<BTreeMap<String, String>, IngestError> {
    let rows: BTreeMap<String, TickerRow> = serde_json::from_slice(body).map_err(|e| IngestError::Decode {
        url: TICKER_TABLE_URL.to_string(),
        message: e.to_string(),
    })?;
    let mut out = BTreeMap::new();
    // rows are keyed "0", "1", ...; keep the first occurrence in numeric order
    let mut ordered: Vec<(u64, TickerRow)> = rows
        .into_iter()
        .map(|(k, v)| (k.parse().unwrap_or(u64::MAX), v))
        .collect();
    ordered.sort_by_key(|(k, _)| *k);
    for (_, row) in ordered {
        out.entry(row.ticker.to_uppercase())
            .or_insert_with(|| format!("{:010}", row.cik_str));
    }
    Ok(out)
}
