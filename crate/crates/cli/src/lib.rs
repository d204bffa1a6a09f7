//! Command-line orchestration: a JSON run configuration, one subcommand per
//! pipeline stage, and `analyze` to run them all.

pub mod config;
pub mod error;
pub mod pipeline;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ffm_core::keywords::{Lexicon, MatrixView};

pub use config::{Overrides, RunConfig};
pub use error::{CliError, Stage};
pub use pipeline::Pipeline;

#[derive(Debug, Parser)]
#[command(name = "filings-factor-miner", version, about = "Mine ESG keyword mentions in SEC filings and relate them to return moments", after_long_help = config::FIELD_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Log progress (repeat for debug output)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run configuration JSON (see `--help` for fields)
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// EDGAR requests per second
    #[arg(long, value_name = "N")]
    pub rate_limit: Option<f64>,
    /// Filing cache directory
    #[arg(long, value_name = "PATH")]
    pub cache_dir: Option<PathBuf>,
    /// Read filings from a local mirror with an index.json instead of EDGAR
    #[arg(long, value_name = "PATH")]
    pub local_corpus: Option<PathBuf>,
    /// Mention views to run, comma separated
    #[arg(long, value_delimiter = ',', value_name = "dummy,count")]
    pub views: Option<Vec<MatrixView>>,
    /// Match keywords on word boundaries only
    #[arg(long)]
    pub word_boundary: bool,
    /// Center matrix columns before the SVD
    #[arg(long)]
    pub center: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Download (or mirror) filings into the cache and write index.json
    Fetch(RunArgs),
    /// Scan every filing for lexicon keywords
    Scan(RunArgs),
    /// Build the company x keyword mention matrix over the in-sample window
    Matrix(RunArgs),
    /// Compute return moments per ticker and window
    Moments(RunArgs),
    /// Decompose each mention view and choose the factor count
    Svd(RunArgs),
    /// Build approximate factors and their compositions
    Factors(RunArgs),
    /// Run the regression grid
    Regress(RunArgs),
    /// Render correlations, facets, the config snapshot and the bundle manifest
    Report(RunArgs),
    /// Run scan through report in one process
    Analyze {
        #[command(flatten)]
        run: RunArgs,
        /// Skip stages whose artifacts already exist
        #[arg(long)]
        resume: bool,
    },
    /// Print the built-in lexicon as JSON
    Lexicon,
}

fn absolute(p: &Option<PathBuf>) -> Option<PathBuf> {
    p.as_ref().map(|p| {
        if p.is_relative() {
            std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.clone())
        } else {
            p.clone()
        }
    })
}

impl RunArgs {
    pub fn load(&self) -> Result<RunConfig, CliError> {
        let o = Overrides {
            rate_limit: self.rate_limit,
            cache_dir: absolute(&self.cache_dir),
            local_corpus: absolute(&self.local_corpus),
            views: self.views.clone(),
            word_boundary: self.word_boundary,
            center: self.center,
        };
        RunConfig::load(&self.config, &o)
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: &Command) -> Result<i32, CliError> {
    let (run, stage) = match command {
        Command::Lexicon => {
            print!("{}", Lexicon::builtin().to_json());
            return Ok(0);
        }
        Command::Fetch(run) => {
            let cfg = run.load()?;
            let report = pipeline::fetch(&cfg, None)?;
            println!(
                "fetched {} filings ({} network calls, {} cache hits)",
                report.filings, report.network_calls, report.cache_hits
            );
            for t in &report.unresolved {
                eprintln!("unresolved ticker: {t}");
            }
            return Ok(if report.unresolved.is_empty() { 0 } else { 1 });
        }
        Command::Analyze { run, resume } => {
            let cfg = run.load()?;
            Pipeline::new(&cfg).analyze(*resume)?;
            println!("{}", cfg.bundle_dir().display());
            return Ok(0);
        }
        Command::Scan(r) => (r, Stage::Scan),
        Command::Matrix(r) => (r, Stage::Matrix),
        Command::Moments(r) => (r, Stage::Moments),
        Command::Svd(r) => (r, Stage::Svd),
        Command::Factors(r) => (r, Stage::Factors),
        Command::Regress(r) => (r, Stage::Regress),
        Command::Report(r) => (r, Stage::Report),
    };
    let cfg = run.load()?;
    Pipeline::new(&cfg).run(stage)?;
    Ok(0)
}

/// Parses `args` (program name first) and runs; usage errors exit with 1.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                1
            } else {
                0
            }
        }
    }
}
