use std::fmt;
use std::path::PathBuf;

use ffm_core::ingest::IngestError;
use ffm_core::keywords::KeywordError;
use ffm_core::market::MarketError;
use ffm_core::regression::RegressionError;
use ffm_core::spectral::SpectralError;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Config,
    Fetch,
    Scan,
    Matrix,
    Moments,
    Svd,
    Factors,
    Regress,
    Report,
}

impl Stage {
    /// Stages in pipeline order, as run by `analyze`.
    pub const PIPELINE: [Stage; 7] = [
        Stage::Scan,
        Stage::Matrix,
        Stage::Moments,
        Stage::Svd,
        Stage::Factors,
        Stage::Regress,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Fetch => "fetch",
            Stage::Scan => "scan",
            Stage::Matrix => "matrix",
            Stage::Moments => "moments",
            Stage::Svd => "svd",
            Stage::Factors => "factors",
            Stage::Regress => "regress",
            Stage::Report => "report",
        }
    }

    /// The library module doing the stage's work.
    pub fn module(self) -> &'static str {
        match self {
            Stage::Config => "cli",
            Stage::Fetch => "corpus_ingest",
            Stage::Scan | Stage::Matrix => "keyword_engine",
            Stage::Moments => "market_data",
            Stage::Svd | Stage::Factors => "spectral",
            Stage::Regress => "regression",
            Stage::Report => "reporting",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.name(), self.module())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Network,
    Numerical,
}

#[derive(Debug, Error)]
pub enum CliErrorDetail {
    #[error("{0}")]
    Message(String),
    #[error("missing artifact {} (run the `{producer}` stage first)", path.display())]
    MissingArtifact { path: PathBuf, producer: &'static str },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Keyword(#[from] KeywordError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Regression(#[from] RegressionError),
}

#[derive(Debug, Error)]
#[error("{stage} stage failed: {detail}")]
pub struct CliError {
    pub stage: Stage,
    pub kind: ErrorKind,
    #[source]
    pub detail: CliErrorDetail,
}

impl CliError {
    pub fn input(stage: Stage, msg: String) -> Self {
        Self {
            stage,
            kind: ErrorKind::Input,
            detail: CliErrorDetail::Message(msg),
        }
    }

    pub fn numerical(stage: Stage, msg: String) -> Self {
        Self {
            stage,
            kind: ErrorKind::Numerical,
            detail: CliErrorDetail::Message(msg),
        }
    }

    pub fn missing(stage: Stage, path: PathBuf, producer: Stage) -> Self {
        Self {
            stage,
            kind: ErrorKind::Input,
            detail: CliErrorDetail::MissingArtifact {
                path,
                producer: producer.name(),
            },
        }
    }

    pub fn io(stage: Stage, path: &std::path::Path, e: std::io::Error) -> Self {
        Self::input(stage, format!("{}: {e}", path.display()))
    }

    /// 1 input or configuration, 2 network, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Input => 1,
            ErrorKind::Network => 2,
            ErrorKind::Numerical => 3,
        }
    }
}

/// Attaches a stage to a library error, classifying it for the exit code.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, CliError>;
}

impl<T, E: Into<CliErrorDetail>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, CliError> {
        self.map_err(|e| {
            let detail = e.into();
            let kind = match &detail {
                CliErrorDetail::Ingest(e) if e.is_network() => ErrorKind::Network,
                CliErrorDetail::Spectral(_) => ErrorKind::Numerical,
                CliErrorDetail::Regression(RegressionError::NonFinite(_)) => ErrorKind::Numerical,
                _ => ErrorKind::Input,
            };
            CliError { stage, kind, detail }
        })
    }
}
