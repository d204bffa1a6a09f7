//! Run configuration: one JSON file drives every subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use ffm_core::keywords::{Lexicon, MatrixView};
use ffm_core::ingest::ratelimit::DEFAULT_RATE;
use ffm_core::period::DateRange;
use ffm_core::RankRule;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Stage};

pub const BUILTIN: &str = "builtin";

/// Field reference printed by `--help`.
pub const FIELD_HELP: &str = "\
CONFIG FIELDS (JSON object; relative paths resolve against the config file's directory)
  run_id          string   bundle name under output_dir (default \"default\")
  tickers         [string] tickers to analyze; alternatively
  ticker_file     path     one ticker per line, '#' starts a comment
  corpus          object   {\"mode\": \"local\", \"local_corpus\": path, \"cache_dir\": path?}
                           or {\"mode\": \"remote\", \"cache_dir\": path}
  forms           [string] form types to fetch (default: all)
  prices_dir      path     directory of <TICKER>.csv files with Date and Adj Close columns
  lexicon         string   \"builtin\" or path to a lexicon JSON file
  in_sample       object   {\"start\": date, \"end\": date}, half-open (default 2019-01-01..2021-01-01)
  forward         object   forward return window (default 2021-01-01..2022-01-01)
  views           [string] mention views to run: \"dummy\", \"count\" (default both)
  rank_rule       object   {\"threshold\": 0.05} or {\"fixed\": 3} (default threshold 0.05)
  grid            object   {\"raw\": bool, \"factors\": bool, \"windows\": [\"in_sample\", \"forward\"]}
  center          bool     center columns before the SVD (default false)
  word_boundary   bool     match keywords on word boundaries only (default false)
  confidence      number   significance level for the bold flag (default 0.90)
  output_dir      path     report root (default \"reports\")
  rate_limit      number   EDGAR requests per second (default 8)
  user_agent      string   EDGAR contact string; falls back to $EDGAR_USER_AGENT
  timestamp       string   optional fixed timestamp recorded in the bundle manifest";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CorpusConfig {
    Local {
        local_corpus: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cache_dir: Option<PathBuf>,
    },
    Remote {
        cache_dir: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    InSample,
    Forward,
}

impl Window {
    pub fn key(self) -> &'static str {
        match self {
            Window::InSample => "in_sample",
            Window::Forward => "forward",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default = "yes")]
    pub raw: bool,
    #[serde(default = "yes")]
    pub factors: bool,
    #[serde(default = "both_windows")]
    pub windows: Vec<Window>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            raw: true,
            factors: true,
            windows: both_windows(),
        }
    }
}

fn yes() -> bool {
    true
}

fn both_windows() -> Vec<Window> {
    vec![Window::InSample, Window::Forward]
}

fn default_run_id() -> String {
    "default".into()
}

fn default_lexicon() -> String {
    BUILTIN.into()
}

fn default_views() -> Vec<MatrixView> {
    vec![MatrixView::Dummy, MatrixView::Count]
}

fn default_output() -> PathBuf {
    PathBuf::from("reports")
}

fn default_rate() -> f64 {
    DEFAULT_RATE
}

fn default_confidence() -> f64 {
    ffm_core::regression::DEFAULT_CONFIDENCE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_run_id")]
    pub run_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tickers: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ticker_file: Option<PathBuf>,
    pub corpus: CorpusConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forms: Option<Vec<String>>,
    pub prices_dir: PathBuf,
    #[serde(default = "default_lexicon")]
    pub lexicon: String,
    #[serde(default = "DateRange::in_sample")]
    pub in_sample: DateRange,
    #[serde(default = "DateRange::forward")]
    pub forward: DateRange,
    #[serde(default = "default_views")]
    pub views: Vec<MatrixView>,
    #[serde(default)]
    pub rank_rule: RankRule,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub center: bool,
    #[serde(default)]
    pub word_boundary: bool,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_rate")]
    pub rate_limit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_agent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub rate_limit: Option<f64>,
    pub cache_dir: Option<PathBuf>,
    pub local_corpus: Option<PathBuf>,
    pub views: Option<Vec<MatrixView>>,
    pub word_boundary: bool,
    pub center: bool,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::input(Stage::Config, msg.into())
}

impl RunConfig {
    /// Reads, resolves relative paths against the file's directory, applies
    /// overrides and validates.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let raw = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&raw).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
        let base = fs::canonicalize(&base).unwrap_or(base);
        cfg.apply(overrides);
        cfg.resolve(&base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(r) = o.rate_limit {
            self.rate_limit = r;
        }
        if let Some(dir) = &o.local_corpus {
            let cache_dir = self.cache_dir().map(Path::to_path_buf);
            self.corpus = CorpusConfig::Local {
                local_corpus: dir.clone(),
                cache_dir,
            };
        }
        if let Some(dir) = &o.cache_dir {
            match &mut self.corpus {
                CorpusConfig::Local { cache_dir, .. } => *cache_dir = Some(dir.clone()),
                CorpusConfig::Remote { cache_dir } => *cache_dir = dir.clone(),
            }
        }
        if let Some(v) = &o.views {
            self.views = v.clone();
        }
        self.word_boundary |= o.word_boundary;
        self.center |= o.center;
    }

    fn resolve(&mut self, base: &Path) {
        let abs = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = &mut self.ticker_file {
            abs(p);
        }
        match &mut self.corpus {
            CorpusConfig::Local { local_corpus, cache_dir } => {
                abs(local_corpus);
                if let Some(c) = cache_dir {
                    abs(c);
                }
            }
            CorpusConfig::Remote { cache_dir } => abs(cache_dir),
        }
        abs(&mut self.prices_dir);
        abs(&mut self.output_dir);
        if self.lexicon != BUILTIN {
            let mut p = PathBuf::from(&self.lexicon);
            abs(&mut p);
            self.lexicon = p.to_string_lossy().into_owned();
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.run_id.trim().is_empty() || self.run_id.contains(['/', '\\']) || self.run_id.starts_with('.') {
            return Err(invalid(format!("run_id '{}' is not a plain directory name", self.run_id)));
        }
        if self.tickers.is_some() && self.ticker_file.is_some() {
            return Err(invalid("set either tickers or ticker_file, not both"));
        }
        for (name, w) in [("in_sample", &self.in_sample), ("forward", &self.forward)] {
            if w.is_empty() {
                return Err(invalid(format!("{name} window {w} is empty")));
            }
        }
        if self.in_sample.overlaps(&self.forward) {
            return Err(invalid(format!(
                "in_sample {} and forward {} windows overlap",
                self.in_sample, self.forward
            )));
        }
        if self.views.is_empty() {
            return Err(invalid("views must name at least one of dummy, count"));
        }
        if self.grid.windows.is_empty() || (!self.grid.raw && !self.grid.factors) {
            return Err(invalid("regression grid selects nothing"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(invalid(format!("confidence {} outside (0, 1)", self.confidence)));
        }
        if !(self.rate_limit.is_finite() && self.rate_limit > 0.0) {
            return Err(invalid(format!("rate_limit {} must be positive", self.rate_limit)));
        }
        match self.rank_rule {
            RankRule::Fixed(0) => return Err(invalid("rank_rule fixed must be at least 1")),
            RankRule::Threshold(t) if !(0.0..1.0).contains(&t) => {
                return Err(invalid(format!("rank_rule threshold {t} outside [0, 1)")))
            }
            _ => {}
        }
        if let Some(p) = &self.ticker_file {
            require_file(p, "ticker_file")?;
        }
        if let CorpusConfig::Local { local_corpus, .. } = &self.corpus {
            require_dir(local_corpus, "local_corpus")?;
        }
        if self.lexicon != BUILTIN {
            require_file(Path::new(&self.lexicon), "lexicon")?;
        }
        Ok(())
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        match &self.corpus {
            CorpusConfig::Local { cache_dir, .. } => cache_dir.as_deref(),
            CorpusConfig::Remote { cache_dir } => Some(cache_dir),
        }
    }

    pub fn window(&self, w: Window) -> DateRange {
        match w {
            Window::InSample => self.in_sample,
            Window::Forward => self.forward,
        }
    }

    /// Configured tickers, upper-cased and deduplicated in order; `None`
    /// when neither `tickers` nor `ticker_file` is set.
    pub fn ticker_list(&self) -> Result<Option<Vec<String>>, CliError> {
        let raw: Vec<String> = match (&self.tickers, &self.ticker_file) {
            (Some(t), _) => t.clone(),
            (None, Some(p)) => {
                let text = fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
                parse_ticker_file(&text)
            }
            (None, None) => return Ok(None),
        };
        let mut out: Vec<String> = Vec::new();
        for t in raw {
            let t = t.trim().to_uppercase();
            if !t.is_empty() && !out.contains(&t) {
                out.push(t);
            }
        }
        if out.is_empty() {
            return Err(invalid("ticker list is empty"));
        }
        Ok(Some(out))
    }

    pub fn load_lexicon(&self) -> Result<Lexicon, CliError> {
        if self.lexicon == BUILTIN {
            Ok(Lexicon::builtin())
        } else {
            Lexicon::load(Path::new(&self.lexicon)).map_err(|e| invalid(e.to_string()))
        }
    }

    pub fn bundle_dir(&self) -> PathBuf {
        self.output_dir.join(&self.run_id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

pub fn parse_ticker_file(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

fn require_file(p: &Path, field: &str) -> Result<(), CliError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(invalid(format!("{field} {} does not exist", p.display())))
    }
}

fn require_dir(p: &Path, field: &str) -> Result<(), CliError> {
    if p.is_dir() {
        Ok(())
    } else {
        Err(invalid(format!("{field} {} does not exist", p.display())))
    }
}
