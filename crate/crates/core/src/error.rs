use std::path::PathBuf;

use crate::numeric::Enclosure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid scalar: {0}")]
    InvalidScalar(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("row {row} column {column}: coordinate {value} outside [0,1]")]
    OutOfRange {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("range enclosure did not reach tolerance within depth {depth}: min {}, max {}", best.0, best.1)]
    EnclosureTooWide {
        depth: u32,
        best: Box<(Enclosure, Enclosure)>,
    },

    #[error("no proposal reached float error {target:e} up to degree {max_degree} (best {best:e})")]
    DegreeExhausted {
        target: f64,
        max_degree: usize,
        best: f64,
    },

    #[error("certification failed on segment {segment} [{interval}]: {detail}")]
    CertificationFailed {
        segment: usize,
        interval: String,
        detail: String,
    },

    #[error("no sign change bracket: {0}")]
    NoBracket(String),

    #[error("root isolation hit depth limit {0} before reaching tolerance")]
    RootDepthExceeded(u32),

    #[error("constant correction {value} exceeds budget {budget}")]
    CorrectionTooLarge { value: String, budget: String },

    #[error("witness condition violated: {0}")]
    ConditionViolation(String),

    #[error("invalid assembly: {0}")]
    InvalidAssembly(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("invalid point-set spec: {0}")]
    InvalidSpec(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
