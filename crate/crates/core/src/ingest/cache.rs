use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use super::{FilingRecord, IngestError};

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IngestError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(
        ".{name}.{}.{}.tmp",
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let mut f = fs::File::create(&tmp).map_err(|e| IngestError::io(&tmp, e))?;
    f.write_all(contents).map_err(|e| IngestError::io(&tmp, e))?;
    f.sync_all().map_err(|e| IngestError::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| IngestError::io(path, e))
}

/// Append-only filing cache laid out as `<root>/<cik>/<accession>.txt`.
#[derive(Clone, Debug)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn text_path(&self, cik: &str, accession: &str) -> PathBuf {
        self.root.join(FilingRecord::relative_text_path(cik, accession))
    }

    pub fn submissions_path(&self, cik: &str) -> PathBuf {
        self.root.join(cik).join("submissions.json")
    }

    pub fn ticker_table_path(&self) -> PathBuf {
        self.root.join("company_tickers.json")
    }

    pub fn index_path(&self) -> PathBuf {
        self.root.join(super::INDEX_FILE)
    }

    /// Non-empty cached file contents, if present.
    pub fn read(&self, path: &Path) -> Option<Vec<u8>> {
        fs::read(path).ok().filter(|b| !b.is_empty())
    }

    pub fn has(&self, path: &Path) -> bool {
        fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false)
    }

    pub fn store(&self, path: &Path, contents: &[u8]) -> Result<(), IngestError> {
        write_atomic(path, contents)
    }
}
