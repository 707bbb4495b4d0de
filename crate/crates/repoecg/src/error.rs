use std::path::PathBuf;

use repoecg_core::enrich::tables::TableError;
use repoecg_core::metricize::MetricError;
use repoecg_core::stats::StatsError;
use repoecg_core::stg::StgError;

/// Every failure the tool reports, each mapped to a stable exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("incomplete dump: {0}")]
    PartialFetch(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("missing metrics: {0}")]
    MissingMetrics(String),
    #[error("comparison needs at least 2 projects with metrics, found {0}")]
    InsufficientProjects(usize),
    #[error("single-class corpus: {0}")]
    SingleClass(String),
    #[error("git: {0}")]
    Git(String),
    #[error("network: {0}")]
    Network(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Other(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Exit codes, fixed across releases.
pub mod exit {
    pub const OK: i32 = 0;
    pub const GENERIC: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const AUTH: i32 = 3;
    pub const RATE_LIMITED: i32 = 4;
    pub const NOT_FOUND: i32 = 5;
    pub const PARTIAL_FETCH: i32 = 6;
    pub const SCHEMA: i32 = 7;
    pub const MISSING_METRICS: i32 = 8;
    pub const INSUFFICIENT_PROJECTS: i32 = 9;
    pub const SINGLE_CLASS: i32 = 10;
    pub const GIT: i32 = 11;
    pub const NETWORK: i32 = 12;
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => exit::USAGE,
            Error::Auth(_) => exit::AUTH,
            Error::RateLimited(_) => exit::RATE_LIMITED,
            Error::NotFound(_) => exit::NOT_FOUND,
            Error::PartialFetch(_) => exit::PARTIAL_FETCH,
            Error::Schema(_) => exit::SCHEMA,
            Error::MissingMetrics(_) => exit::MISSING_METRICS,
            Error::InsufficientProjects(_) => exit::INSUFFICIENT_PROJECTS,
            Error::SingleClass(_) => exit::SINGLE_CLASS,
            Error::Git(_) => exit::GIT,
            Error::Network(_) => exit::NETWORK,
            Error::Io { .. } | Error::Other(_) => exit::GENERIC,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }
}

impl From<MetricError> for Error {
    fn from(e: MetricError) -> Self {
        Error::Other(e.to_string())
    }
}

impl From<StgError> for Error {
    fn from(e: StgError) -> Self {
        Error::Other(e.to_string())
    }
}

impl From<StatsError> for Error {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::TooFewProjects(n) => Error::InsufficientProjects(n),
            other => Error::Other(other.to_string()),
        }
    }
}

impl From<TableError> for Error {
    fn from(e: TableError) -> Self {
        Error::Config(e.to_string())
    }
}
