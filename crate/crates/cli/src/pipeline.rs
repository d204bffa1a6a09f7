//! Pipeline stages. Each stage reads its inputs from JSON artifacts under
//! `<bundle>/artifacts/` and writes its own, so a staged run and `analyze`
//! take the same path and produce the same bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use ffm_core::ingest::{
    self, Cache, CorpusIndex, Fetcher, RateLimiter, RemoteSource, SystemClock, Transport,
};
use ffm_core::keywords::{
    build_matrix_from_scans, facet_breakdown, scan_corpus, Facet, Lexicon, MatrixBuild, MatrixView,
    ScannedFiling, Scanner,
};
use ffm_core::market::{self, cross_section_summary, Moment};
use ffm_core::period::DateRange;
use ffm_core::regression::{mention_correlation, regression_suite, Design};
use ffm_core::report::{self, ReportBundle, TableEntry};
use ffm_core::spectral::{self, build_factors, factor_feature_correlation, select_rank};
use ffm_core::{Factors, Mat, Moments, Suite, Svd};
use log::{info, warn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{CorpusConfig, RunConfig, Window};
use crate::error::{AtStage, CliError, Stage};

pub const ARTIFACTS: &str = "artifacts";
pub const MANIFEST: &str = "bundle.json";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanArtifact {
    pub lexicon: Lexicon,
    pub word_boundary: bool,
    /// Tickers the run covers, sorted.
    pub universe: Vec<String>,
    pub filings: Vec<ScannedFiling>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentsArtifact {
    /// Keyed by window (`in_sample`, `forward`).
    pub windows: BTreeMap<String, Vec<Moments>>,
    /// Per window, tickers left out and why.
    pub skipped: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SvdArtifact {
    pub view: MatrixView,
    pub centered: bool,
    pub var_explained: Vec<f64>,
    pub k_star: usize,
    pub svd: Svd,
}

/// Outcome of `fetch`.
#[derive(Clone, Debug, Default)]
pub struct FetchReport {
    pub filings: usize,
    pub network_calls: usize,
    pub cache_hits: usize,
    pub unresolved: Vec<String>,
}

pub struct Pipeline<'a> {
    cfg: &'a RunConfig,
    bundle: PathBuf,
}

const SCAN: &str = "scan.json";
const MATRIX: &str = "matrix.json";
const MOMENTS: &str = "moments.json";
const REGRESS: &str = "regress.json";

fn svd_file(view: MatrixView) -> String {
    format!("svd_{}.json", view.key())
}

fn factors_file(view: MatrixView) -> String {
    format!("factors_{}.json", view.key())
}

impl<'a> Pipeline<'a> {
    pub fn new(cfg: &'a RunConfig) -> Self {
        Self {
            cfg,
            bundle: cfg.bundle_dir(),
        }
    }

    pub fn bundle_dir(&self) -> &Path {
        &self.bundle
    }

    pub fn run(&self, stage: Stage) -> Result<(), CliError> {
        info!("stage {stage}");
        match stage {
            Stage::Scan => self.scan(),
            Stage::Matrix => self.matrix(),
            Stage::Moments => self.moments(),
            Stage::Svd => self.svd(),
            Stage::Factors => self.factors(),
            Stage::Regress => self.regress(),
            Stage::Report => self.report(),
            Stage::Config | Stage::Fetch => unreachable!("not an offline stage"),
        }
    }

    /// Every offline stage in order. With `resume`, stages whose artifacts
    /// already exist are skipped.
    pub fn analyze(&self, resume: bool) -> Result<(), CliError> {
        for stage in Stage::PIPELINE {
            if resume && self.is_done(stage) {
                info!("stage {stage}: artifacts present, skipping");
                continue;
            }
            self.run(stage)?;
        }
        Ok(())
    }

    fn is_done(&self, stage: Stage) -> bool {
        let names: Vec<String> = match stage {
            Stage::Scan => vec![SCAN.into()],
            Stage::Matrix => vec![MATRIX.into()],
            Stage::Moments => vec![MOMENTS.into()],
            Stage::Svd => self.cfg.views.iter().map(|&v| svd_file(v)).collect(),
            Stage::Factors => self.cfg.views.iter().map(|&v| factors_file(v)).collect(),
            Stage::Regress => vec![REGRESS.into()],
            _ => return false,
        };
        names.iter().all(|n| self.artifact_path(n).is_file())
    }

    fn artifact_path(&self, name: &str) -> PathBuf {
        self.bundle.join(ARTIFACTS).join(name)
    }

    fn read_artifact<T: DeserializeOwned>(&self, stage: Stage, name: &str, producer: Stage) -> Result<T, CliError> {
        let path = self.artifact_path(name);
        let raw = match fs::read(&path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(CliError::missing(stage, path, producer))
            }
            Err(e) => return Err(CliError::io(stage, &path, e)),
        };
        serde_json::from_slice(&raw)
            .map_err(|e| CliError::input(stage, format!("corrupt artifact {}: {e}", path.display())))
    }

    fn write_artifact<T: Serialize>(&self, stage: Stage, name: &str, value: &T) -> Result<(), CliError> {
        let mut json = serde_json::to_string(value).expect("artifact serializes");
        json.push('\n');
        self.write_raw(stage, &Path::new(ARTIFACTS).join(name), &json)
    }

    fn write_out(&self, stage: Stage, rel: &str, contents: &str) -> Result<(), CliError> {
        self.write_raw(stage, Path::new(rel), contents)
    }

    fn write_raw(&self, stage: Stage, rel: &Path, contents: &str) -> Result<(), CliError> {
        ingest::write_atomic(&self.bundle.join(rel), contents.as_bytes()).at(stage)
    }

    fn scan(&self) -> Result<(), CliError> {
        let st = Stage::Scan;
        let lexicon = self.cfg.load_lexicon()?;
        let corpus = load_corpus(self.cfg, st)?;
        let universe = match self.cfg.ticker_list()? {
            Some(tickers) => {
                let present: BTreeSet<String> = corpus.tickers().into_iter().collect();
                for t in tickers.iter().filter(|t| !present.contains(*t)) {
                    warn!("{t}: no filings in the corpus");
                }
                let mut u = tickers;
                u.sort();
                u
            }
            None => corpus.tickers(),
        };
        let corpus = corpus.filter_tickers(&universe);
        let scanner = Scanner::new(&lexicon, self.cfg.word_boundary);
        let filings = scan_corpus(&corpus, &scanner).at(st)?;
        info!("scanned {} filings for {} keywords", filings.len(), lexicon.len());
        self.write_artifact(
            st,
            SCAN,
            &ScanArtifact {
                lexicon,
                word_boundary: self.cfg.word_boundary,
                universe,
                filings,
            },
        )
    }

    fn matrix(&self) -> Result<(), CliError> {
        let st = Stage::Matrix;
        let scan: ScanArtifact = self.read_artifact(st, SCAN, Stage::Scan)?;
        let build = build_matrix_from_scans(&scan.filings, &scan.lexicon, &self.cfg.in_sample, &scan.universe).at(st)?;
        for t in &build.excluded {
            warn!("{t}: no filing inside {}", self.cfg.in_sample);
        }
        self.write_out(st, "summary/mentions_count.csv", &report::render_mention_matrix(&build.matrix, false))?;
        self.write_out(st, "summary/mentions_dummy.csv", &report::render_mention_matrix(&build.matrix, true))?;
        self.write_artifact(st, MATRIX, &build)
    }

    fn moments(&self) -> Result<(), CliError> {
        let st = Stage::Moments;
        let dir = &self.cfg.prices_dir;
        if !dir.is_dir() {
            return Err(CliError::input(st, format!("prices_dir {} does not exist", dir.display())));
        }
        let tickers = match self.cfg.ticker_list()? {
            Some(t) => t,
            None => price_files(dir).map_err(|e| CliError::io(st, dir, e))?,
        };
        let windows = [Window::InSample, Window::Forward];
        let mut art = MomentsArtifact {
            windows: windows.iter().map(|w| (w.key().to_string(), Vec::new())).collect(),
            skipped: windows.iter().map(|w| (w.key().to_string(), BTreeMap::new())).collect(),
        };
        let mut sorted = tickers;
        sorted.sort();
        for t in &sorted {
            let path = dir.join(format!("{t}.csv"));
            let series = if path.is_file() {
                market::load_prices::<f64>(&path, t)
            } else {
                Err(market::MarketError::Io {
                    path: path.display().to_string(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "no price file"),
                })
            };
            for w in windows {
                let key = w.key().to_string();
                let stats = series
                    .as_ref()
                    .map_err(|e| e.to_string())
                    .and_then(|s| s.window(&self.cfg.window(w)).map_err(|e| e.to_string()))
                    .and_then(|s| market::moments(&s).map_err(|e| e.to_string()));
                match stats {
                    Ok(m) => art.windows.get_mut(&key).expect("window").push(m),
                    Err(reason) => {
                        warn!("{t} ({key}): {reason}");
                        art.skipped.get_mut(&key).expect("window").insert(t.clone(), reason);
                    }
                }
            }
        }
        for w in windows {
            let stats = &art.windows[w.key()];
            if stats.is_empty() {
                return Err(CliError::input(
                    st,
                    format!("no ticker has usable prices in the {} window {}", w.key(), self.cfg.window(w)),
                ));
            }
            let summary = cross_section_summary(stats).at(st)?;
            self.write_out(st, &format!("summary/moments_{}.csv", w.key()), &report::render_moments(stats))?;
            self.write_out(
                st,
                &format!("summary/return_summary_{}.csv", w.key()),
                &report::render_summary_csv(&summary),
            )?;
            self.write_out(
                st,
                &format!("summary/return_summary_{}.md", w.key()),
                &report::render_summary_markdown(&summary),
            )?;
        }
        self.write_artifact(st, MOMENTS, &art)
    }

    fn svd_input(&self, build: &MatrixBuild, view: MatrixView) -> Mat {
        let x: Mat = build.matrix.design(view);
        if self.cfg.center {
            spectral::center_columns(&x)
        } else {
            x
        }
    }

    fn svd(&self) -> Result<(), CliError> {
        let st = Stage::Svd;
        let build: MatrixBuild = self.read_artifact(st, MATRIX, Stage::Matrix)?;
        for &view in &self.cfg.views {
            let x = self.svd_input(&build, view);
            let svd = spectral::decompose(&x).at(st)?;
            let ve = svd.explained_variance().at(st)?;
            let k_star = select_rank(&ve, self.cfg.rank_rule).at(st)?;
            info!("{} view: k* = {k_star}, var_explained = {}", view.key(), report::bracketed(&ve, 3));
            self.write_out(st, &format!("scree/{}_scree.csv", view.key()), &report::render_scree(&svd))?;
            self.write_out(
                st,
                &format!("scree/{}_var_explained.txt", view.key()),
                &report::render_var_explained(&ve),
            )?;
            self.write_artifact(
                st,
                &svd_file(view),
                &SvdArtifact {
                    view,
                    centered: self.cfg.center,
                    var_explained: ve,
                    k_star,
                    svd,
                },
            )?;
        }
        Ok(())
    }

    fn factors(&self) -> Result<(), CliError> {
        let st = Stage::Factors;
        let build: MatrixBuild = self.read_artifact(st, MATRIX, Stage::Matrix)?;
        let labels = build.matrix.lexicon.labels();
        let tickers = &build.matrix.companies;
        for &view in &self.cfg.views {
            let art: SvdArtifact = self.read_artifact(st, &svd_file(view), Stage::Svd)?;
            let x = self.svd_input(&build, view);
            let factors = build_factors(&x, &art.svd, art.k_star, view.key()).at(st)?;
            let raw: Mat = build.matrix.design(view);
            let corr = factor_feature_correlation(&factors, &raw, &labels).at(st)?;
            let v = view.key();
            self.write_out(st, &format!("summary/{v}_factors.csv"), &report::render_factors(tickers, &factors))?;
            self.write_out(
                st,
                &format!("scree/{v}_composition.csv"),
                &report::render_composition(&art.svd, &labels, art.k_star),
            )?;
            self.write_out(
                st,
                &format!("correlations/{v}_factor_features.csv"),
                &report::render_factor_correlation_csv(&corr),
            )?;
            self.write_out(
                st,
                &format!("correlations/{v}_factor_features.md"),
                &report::render_factor_correlation_markdown(&corr),
            )?;
            self.write_artifact(st, &factors_file(view), &factors)?;
        }
        Ok(())
    }

    fn regress(&self) -> Result<(), CliError> {
        let st = Stage::Regress;
        let build: MatrixBuild = self.read_artifact(st, MATRIX, Stage::Matrix)?;
        let moments: MomentsArtifact = self.read_artifact(st, MOMENTS, Stage::Moments)?;
        let grid = &self.cfg.grid;
        let mut suites: Vec<Suite> = Vec::new();
        for &view in &self.cfg.views {
            let mut designs = Vec::new();
            if grid.raw {
                designs.push(Design::from_mentions(&build.matrix, view));
            }
            if grid.factors {
                let f: Factors = self.read_artifact(st, &factors_file(view), Stage::Factors)?;
                designs.push(Design::from_factors(&build.matrix.companies, &f, view));
            }
            for design in &designs {
                for &w in &grid.windows {
                    let stats = moments.windows.get(w.key()).map(Vec::as_slice).unwrap_or_default();
                    let suite = regression_suite(design, stats, w.key()).at(st)?;
                    for t in &suite.unmatched_design {
                        warn!("{t}: no {} return moments, left out of {}", w.key(), design.name());
                    }
                    self.write_suite(design, &suite)?;
                    suites.push(suite);
                }
            }
        }
        self.write_artifact(st, REGRESS, &suites)
    }

    fn write_suite(&self, design: &Design<f64>, suite: &Suite) -> Result<(), CliError> {
        let st = Stage::Regress;
        let stem = format!("regressions/{}_{}", design.name(), suite.window);
        let headers: Vec<String> = suite.results.iter().map(|r| r.dependent.clone()).collect();
        let md = report::render_regression_markdown(&suite.results, &headers, &design.column_labels, self.cfg.confidence);
        self.write_out(st, &format!("{stem}.md"), &md)?;
        for (moment, r) in Moment::ALL.iter().zip(&suite.results) {
            self.write_out(
                st,
                &format!("{stem}_{}.csv", moment.key()),
                &report::render_regression_csv(r, self.cfg.confidence),
            )?;
        }
        Ok(())
    }

    fn report(&self) -> Result<(), CliError> {
        let st = Stage::Report;
        let scan: ScanArtifact = self.read_artifact(st, SCAN, Stage::Scan)?;
        let build: MatrixBuild = self.read_artifact(st, MATRIX, Stage::Matrix)?;
        for &view in &self.cfg.views {
            let v = view.key();
            match mention_correlation::<f64>(&build.matrix, view) {
                Ok(table) => {
                    self.write_out(st, &format!("correlations/{v}_mentions.csv"), &report::render_correlation_csv(&table, false))?;
                    self.write_out(st, &format!("correlations/{v}_mentions.md"), &report::render_correlation_markdown(&table))?;
                }
                Err(e) => warn!("{v} mention correlations skipped: {e}"),
            }
        }
        for facet in Facet::ALL {
            let table = facet_breakdown(&scan.filings, &scan.lexicon, facet);
            self.write_out(st, &format!("facets/{}.csv", facet.key()), &report::render_facets(&table))?;
        }
        self.write_out(st, "config.json", &self.cfg.to_json())?;
        let tables = list_tables(&self.bundle).map_err(|e| CliError::io(st, &self.bundle, e))?;
        let bundle = ReportBundle {
            run_config_snapshot: serde_json::to_value(self.cfg).expect("config serializes"),
            tables,
            timestamp: self.cfg.timestamp.clone(),
        };
        let mut json = serde_json::to_string_pretty(&bundle).expect("bundle serializes");
        json.push('\n');
        self.write_out(st, MANIFEST, &json)
    }
}

/// Corpus the offline stages read: the fetch cache when it holds an index,
/// otherwise the configured local mirror.
pub fn load_corpus(cfg: &RunConfig, stage: Stage) -> Result<CorpusIndex, CliError> {
    if let Some(dir) = cfg.cache_dir() {
        if dir.join(ingest::INDEX_FILE).is_file() {
            return ingest::load_local_corpus(dir).at(stage);
        }
    }
    match &cfg.corpus {
        CorpusConfig::Local { local_corpus, .. } => ingest::load_local_corpus(local_corpus).at(stage),
        CorpusConfig::Remote { cache_dir } => Err(CliError::missing(
            stage,
            cache_dir.join(ingest::INDEX_FILE),
            Stage::Fetch,
        )),
    }
}

fn price_files(dir: &Path) -> std::io::Result<Vec<String>> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir)? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")) {
            if let Some(stem) = p.file_stem() {
                out.push(stem.to_string_lossy().to_uppercase());
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Rendered files under the bundle, excluding artifacts and the manifest.
fn list_tables(root: &Path) -> std::io::Result<Vec<TableEntry>> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<TableEntry>) -> std::io::Result<()> {
        for e in fs::read_dir(dir)? {
            let p = e?.path();
            let rel = p.strip_prefix(root).expect("under root").to_path_buf();
            let name = rel.to_string_lossy().replace('\\', "/");
            if name == ARTIFACTS || name == MANIFEST || name.rsplit('/').next().is_some_and(|n| n.starts_with('.')) {
                continue;
            }
            if p.is_dir() {
                walk(root, &p, out)?;
            } else {
                let format = p.extension().map(|x| x.to_string_lossy().into_owned()).unwrap_or_default();
                let stem = name.strip_suffix(&format!(".{format}")).unwrap_or(&name).to_string();
                out.push(TableEntry {
                    name: stem,
                    format,
                    path: PathBuf::from(name),
                });
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(root, root, &mut out)?;
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}

/// Fetches the configured tickers into the cache. Local mode mirrors the
/// local corpus; remote mode talks to EDGAR through `transport`.
pub fn fetch(cfg: &RunConfig, transport: Option<Arc<dyn Transport>>) -> Result<FetchReport, CliError> {
    let st = Stage::Fetch;
    let tickers = cfg.ticker_list()?;
    let range: DateRange = cfg.in_sample;
    let forms: Option<BTreeSet<String>> = cfg.forms.as_ref().map(|f| f.iter().cloned().collect());
    let fetcher = match &cfg.corpus {
        CorpusConfig::Local { local_corpus, cache_dir } => {
            let mirror = ingest::load_local_corpus(local_corpus).at(st)?;
            let cache = cache_dir.clone().unwrap_or_else(|| cfg.output_dir.join("cache"));
            Fetcher::mirror(mirror, Cache::new(cache))
        }
        CorpusConfig::Remote { cache_dir } => {
            let ua = cfg
                .user_agent
                .clone()
                .or_else(|| std::env::var(ingest::edgar::USER_AGENT_ENV).ok())
                .unwrap_or_default();
            let transport = match transport {
                Some(t) => t,
                None => Arc::new(
                    ingest::transport::ReqwestTransport::new(Duration::from_secs(30))
                        .map_err(|e| CliError::input(st, e.to_string()))?,
                ),
            };
            let limiter = Arc::new(RateLimiter::new(cfg.rate_limit, Arc::new(SystemClock::default())));
            let source = RemoteSource::new(transport, limiter, &ua).at(st)?;
            Fetcher::remote(source, Cache::new(cache_dir.clone()))
        }
    };
    let tickers = match tickers {
        Some(t) => t,
        None => match &cfg.corpus {
            CorpusConfig::Local { local_corpus, .. } => ingest::load_local_corpus(local_corpus).at(st)?.tickers(),
            CorpusConfig::Remote { .. } => {
                return Err(CliError::input(st, "remote fetch needs tickers or ticker_file".into()))
            }
        },
    };
    let (index, unresolved) = fetcher.fetch_all(&tickers, &range, forms.as_ref()).at(st)?;
    let stats = fetcher.stats();
    Ok(FetchReport {
        filings: index.len(),
        network_calls: stats.network_calls,
        cache_hits: stats.cache_hits,
        unresolved,
    })
}
