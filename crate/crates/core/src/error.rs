use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate interval [{a}, {b}]")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment order {k} exceeds the supported maximum {max}")]
    MomentOrder { k: usize, max: usize },

    #[error("domain is not commensurate with a grid of {n} cells per unit length")]
    Incommensurate { n: usize },

    #[error("point {0:?} lies outside the domain")]
    OutsideDomain(Vec<f64>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-positive diagonal entry {value} in row {row}")]
    NonPositiveDiagonal { row: usize, value: f64 },

    #[error("oracle refinement check failed: {coarse} vs {fine}")]
    OracleUntrusted { coarse: f64, fine: f64 },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
