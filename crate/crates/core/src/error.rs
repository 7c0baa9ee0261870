use std::path::PathBuf;

use thiserror::Error;

use crate::peer::BufferMapError;
use crate::priority::PriorityError;
use crate::schedule::ScheduleError;
use crate::sim::ConfigError;
use crate::solvers::SolverError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-level error. Each module has its own error type; this wraps them
/// for callers that drive the whole pipeline (simulator, CLI).
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Priority(#[from] PriorityError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    BufferMap(#[from] BufferMapError),
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("simulation invariant violated at tick {tick}: {detail}")]
    Invariant { tick: i64, detail: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for configuration problems,
    /// 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}
