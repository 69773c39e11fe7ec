use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("corpus is empty: {0}")]
    EmptyCorpus(String),

    #[error("invalid date range: start {start} is after end {end}")]
    InvalidRange {
        start: chrono::NaiveDate,
        end: chrono::NaiveDate,
    },

    #[error("n-gram order {0} outside [1, 4]")]
    InvalidN(usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("positive and negative shares are tied at {0}")]
    TiedTrend(f64),

    #[error("lexicon {path}, line {line}: {message}")]
    Lexicon {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Internal,
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Stage name when the error carries stage attribution.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    /// Innermost error with stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self.root() {
            Error::Config(_) | Error::InvalidRange { .. } | Error::InvalidN(_) => {
                ErrorClass::Config
            }
            Error::FileNotFound(_)
            | Error::Schema(_)
            | Error::EmptyCorpus(_)
            | Error::EmptyInput(_)
            | Error::TiedTrend(_)
            | Error::Lexicon { .. }
            | Error::Csv(_)
            | Error::Json(_) => ErrorClass::Data,
            Error::Io(_) | Error::Stage { .. } => ErrorClass::Internal,
        }
    }
}
