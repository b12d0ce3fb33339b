use std::path::PathBuf;

use thiserror::Error;

use crate::genmodels::ConcentrationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: measure must be positive and finite, got {0}")]
    InvalidMeasure(f64),

    #[error("undefined state: {0}")]
    UndefinedState(&'static str),

    #[error("out-of-order timestamp: {got} arrived after {newest}")]
    Ordering { newest: i64, got: i64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid parameter `{param}`: {reason}")]
    Domain { param: &'static str, reason: String },

    #[error("concentration predicate not met after {attempts} attempts ({} of {} core nodes failed)", .report.failing_nodes, .report.s_size)]
    Concentration {
        attempts: usize,
        report: Box<ConcentrationReport>,
    },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("graph has no planted community")]
    MissingPlanted,

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn domain(param: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            param,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error came from the filesystem rather than from bad input or parameters.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
