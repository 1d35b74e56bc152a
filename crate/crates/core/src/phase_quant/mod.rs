//! Matrix-scale quantization on the torus: Weyl quantization of symbols, the
//! open baker's map, a dilation model with a single hyperbolic fixed point,
//! damping factors and escape-function conjugation.
//!
//! Everything lives on `C^N` with semiclassical parameter `h = 1/(2 pi N)`.

mod baker;
mod dilation;
mod escape;
mod io;
mod symbol;
mod weyl;

pub use baker::{baker_classical, baker_closed, baker_open};
pub use dilation::{dilation_classical, dilation_model, dilation_survives, smooth_cutoff};
pub use escape::{
    apply_damping, conjugate_escape, egorov_defect, validate_escape_function, ConjugatedOperator, EscapeCheck,
    EscapeWeight,
};
pub use io::{read_operator, write_operator, write_operator_csv, OPERATOR_MAGIC, OPERATOR_VERSION};
pub use symbol::SymbolGrid;
pub use weyl::quantize_weyl;

use thiserror::Error;

use crate::linalg::{self, CMat, LinalgError};

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("operator is singular")]
    Singular,
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("malformed operator file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<LinalgError> for PhaseError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular => PhaseError::Singular,
            LinalgError::DimensionMismatch(s) => PhaseError::DimensionMismatch(s),
            LinalgError::ConvergenceFailure => PhaseError::Numeric(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, PhaseError>;

/// Semiclassical parameter of dimension `n`.
pub fn h_of(n: usize) -> f64 {
    1.0 / (std::f64::consts::TAU * n as f64)
}

/// Square complex matrix acting on `C^N`, tagged with `h = 1/(2 pi N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusOperator {
    entries: CMat,
}

impl TorusOperator {
    /// Panics if `entries` is not square and nonempty.
    pub fn new(entries: CMat) -> Self {
        assert!(
            entries.nrows() == entries.ncols() && entries.nrows() > 0,
            "torus operator must be square and nonempty"
        );
        Self { entries }
    }

    pub fn try_new(entries: CMat) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(PhaseError::DimensionMismatch(format!(
                "{}x{} is not a nonempty square matrix",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { entries })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(linalg::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn h(&self) -> f64 {
        h_of(self.dim())
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    pub fn norm(&self) -> f64 {
        linalg::operator_norm(&self.entries)
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.entries.adjoint())
    }

    pub fn compose(&self, other: &TorusOperator) -> Result<Self> {
        check_dims(self, other)?;
        Ok(Self::new(&self.entries * &other.entries))
    }

    pub fn power(&self, k: usize) -> Self {
        Self::new(linalg::matrix_power(&self.entries, k))
    }

    pub fn eigenvalues(&self) -> Result<Vec<num_complex::Complex64>> {
        Ok(linalg::eigenvalues(&self.entries)?)
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().map_or(0.0, |z| z.norm()))
    }
}

pub(crate) fn check_dims(a: &TorusOperator, b: &TorusOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(PhaseError::DimensionMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}
