#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden")
}

/// Writes a copy of the golden config into `dir` with absolute input paths
/// and `output_dir` inside `dir`; `edit` may adjust the JSON first.
pub fn golden_config(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let fx = fixture_dir();
    let raw = fs::read_to_string(fx.join("config.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&raw).unwrap();
    v["corpus"]["local_corpus"] = fx.join("corpus").to_string_lossy().into_owned().into();
    v["prices_dir"] = fx.join("prices").to_string_lossy().into_owned().into();
    v["output_dir"] = dir.join("reports").to_string_lossy().into_owned().into();
    edit(&mut v);
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

pub fn cli(args: &[&str]) -> i32 {
    let mut full = vec!["filings-factor-miner"];
    full.extend_from_slice(args);
    ffm_cli::run_from(full)
}

/// Every file under `root`, keyed by forward-slash relative path.
pub fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Term labels of a rendered regression table (body rows before the
/// adjusted R-squared footer).
pub fn table_terms(md: &str) -> Vec<String> {
    md.lines()
        .skip(2)
        .filter(|l| !l.starts_with("| Model Adj. R2"))
        .map(|l| l.trim_start_matches('|').split('|').next().unwrap().trim().to_string())
        .collect()
}
