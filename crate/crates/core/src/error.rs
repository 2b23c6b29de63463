//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh mismatch: {0} vs {1}")]
    MeshMismatch(f64, f64),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stability gate refused: k = {k} exceeds k_max = {k_max}")]
    Unstable { k: f64, k_max: f64 },

    #[error("insufficient truncation: {0}")]
    Truncation(String),

    #[error("non-nested meshes: {coarse} is not a power-of-two multiple of {fine}")]
    NonNested { coarse: f64, fine: f64 },

    #[error("rate bound violated: rate {rate} exceeds bound {bound}")]
    RateBound { rate: f64, bound: f64 },

    #[error("nonpositive denominator in explicit c at node {node}")]
    NonPositiveDenominator { node: usize },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MeshMismatch(..) => "mesh_mismatch",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Unstable { .. } => "unstable",
            Error::Truncation(_) => "truncation",
            Error::NonNested { .. } => "non_nested",
            Error::RateBound { .. } => "rate_bound",
            Error::NonPositiveDenominator { .. } => "nonpositive_denominator",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
