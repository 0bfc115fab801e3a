use thiserror::Error;

use crate::spectral::GridSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {left:?} vs {right:?}")]
    GridMismatch { left: GridSpec, right: GridSpec },

    #[error("axis {axis} out of range for a {dimension}-dimensional torus")]
    AxisOutOfRange { axis: usize, dimension: usize },

    #[error("operation requires dimension {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("requested {requested} active modes but the dealias cutoff is {cutoff}")]
    ModesExceedCutoff { requested: usize, cutoff: usize },

    #[error("divergence field has nonzero mean {0:e}")]
    NonzeroMean(f64),

    #[error("degenerate 2-plane: gram determinant {gram:e} below {threshold:e}")]
    DegeneratePlane { gram: f64, threshold: f64 },

    #[error("blow-up at t = {t}: {reason}")]
    Blowup { t: f64, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;
