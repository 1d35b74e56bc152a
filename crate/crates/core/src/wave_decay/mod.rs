//! Local energy decay of waves outside obstacles, and matrix-scale checks of
//! the resolvent contour representation of `e^{tA}(I - A)^{-k}`.

mod block;
mod contour;
mod fdtd;

pub use block::generator_block_resolvent;
pub use contour::{
    contour_decay_rate, deformed_contour_check, gauss_legendre, random_dissipative, semigroup_contour, ContourOptions, ContourResult,
    DeformedCheck, DeformedOptions,
};
pub use fdtd::{fdtd_run, EnergySample, EnergyTrace, FdtdOptions, PulseKind, WaveGrid, WaveGridSpec, WaveState};

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum WaveError {
    #[error("time step {dt} violates the CFL limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("solution blew up at t = {time}")]
    UnstableBlowup { time: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("generator is not dissipative (Hermitian part has eigenvalue {max_eig:e})")]
    NotDissipative { max_eig: f64 },
    #[error("contour truncation would need |Re lambda| up to {lambda_max:e}")]
    TailTooLarge { lambda_max: f64 },
    #[error("resolvent pole at lambda = {pole} lies on or across the deformed path")]
    PoleOnPath { pole: Complex64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular linear system")]
    Singular,
    #[error("eigensolver did not converge")]
    ConvergenceFailure,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<crate::linalg::LinalgError> for WaveError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        use crate::linalg::LinalgError as L;
        match e {
            L::Singular => WaveError::Singular,
            L::ConvergenceFailure => WaveError::ConvergenceFailure,
            L::DimensionMismatch(s) => WaveError::DimensionMismatch(s),
        }
    }
}

pub type Result<T> = std::result::Result<T, WaveError>;
