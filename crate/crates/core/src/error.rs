use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = PttError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PttError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("grid mismatch: n={left} vs n={right}")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("initial data construction failed: {0}")]
    Construction(String),

    #[error("Riccati solution is singular at t={blowup_time} (requested t={requested})")]
    Singularity { blowup_time: f64, requested: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("records out of order: t={got} after t={last}")]
    Sequencing { last: f64, got: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("time step collapsed at t={t}: dt={dt} below dt_min={dt_min}")]
    StepCollapse { t: f64, dt: f64, dt_min: f64 },

    #[error("linear envelope violated at t={t}: ratio {ratio} exceeds {bound}")]
    EnvelopeViolation { t: f64, ratio: f64, bound: f64 },

    #[error("invariant failure: {0}")]
    InvariantFailure(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error("unsupported snapshot version {0}")]
    UnsupportedVersion(u32),

    #[error("corrupt state on load: {0}")]
    CorruptState(String),

    #[error("config error at line {line}, key `{key}`: {reason}")]
    Config {
        key: String,
        line: usize,
        reason: String,
    },

    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PttError {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        PttError::Precondition(msg.into())
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        PttError::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PttError::Io {
            path: path.into(),
            source,
        }
    }
}
