use thiserror::Error;

use crate::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NhError {
    #[error("logarithm undefined at z = {0}")]
    Domain(C64),

    #[error("eigenvalue {0} lies in the upper half-plane (passivity violated)")]
    Passivity(C64),

    #[error("pole of the gamma function at z = {0}")]
    Pole(C64),

    #[error("energy {omega} outside the reservoir band (t = {t}, g = {g})")]
    Band { omega: f64, t: f64, g: f64 },

    #[error("invalid parameters: {0}")]
    Spec(String),

    #[error("matrix is defective at mode {mode}: left/right overlap {overlap:.3e}")]
    Defective { mode: usize, overlap: f64 },

    #[error("total dimension {dim} exceeds the cap {cap}")]
    DimCap { dim: usize, cap: usize },

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, NhError>;

impl From<ndarray_linalg::error::LinalgError> for NhError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        NhError::Linalg(e.to_string())
    }
}
