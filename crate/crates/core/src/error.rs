use crate::geometry::{GeometryError, MeshError};
use crate::linalg::LinalgError;

/// One nonlinear iteration as recorded in a failure trace.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub residual: f64,
    pub step_norm: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("negative influx {flux:e} across the inlet")]
    NegativeInflux { flux: f64 },
    #[error("boundary data flux mismatch {mismatch:e}")]
    Compatibility { mismatch: f64 },
    #[error("nonlinear iteration diverged: {reason} after {} iterations", trace.len())]
    Diverged { reason: String, trace: Vec<IterationRecord> },
    #[error("line search failed at residual {residual:e}")]
    LineSearchFailure { residual: f64 },
    #[error("continuation stalled at lambda = {lambda} (step {step:e})")]
    ContinuationStalled { lambda: f64, step: f64 },
    #[error("a-priori bound constant has not been calibrated")]
    ConstantsMissing,
    #[error("config line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
