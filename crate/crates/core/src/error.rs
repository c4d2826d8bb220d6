use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("profile is not in the equivariant class: {0}")]
    NotInClass(String),

    #[error("profile touches the south pole at node {node} (v3 = {v3})")]
    PoleProximity { node: usize, v3: f64 },

    #[error("minimising scale log s = {log_s} sits on the edge of the scan window")]
    ScaleOutOfRange { log_s: f64 },

    #[error("outside projection regime: excess {excess:e} >= gate {gate:e}")]
    OutsideProjectionRegime { excess: f64, gate: f64 },

    #[error("degenerate frame anchor: |P^v e| = {0:e}")]
    DegenerateAnchor(f64),

    #[error("history is not equispaced in time")]
    NotEquispaced,

    #[error("Newton iteration did not converge at t = {t} (last update {update:e})")]
    NonConvergence { t: f64, update: f64 },

    #[error("numerical abort at t = {t}: {reason}")]
    NumericalAbort { t: f64, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
