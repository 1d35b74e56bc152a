//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("eigensolver did not converge")]
    ConvergenceFailure,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub const C0: Complex64 = Complex64::new(0.0, 0.0);
pub const C1: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Seed used for every power-iteration start vector.
pub const POWER_SEED: u64 = 0x05ca_77e2;

#[derive(Debug, Clone, Copy)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 400,
        }
    }
}

fn start_vector(n: usize) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let v = CVec::from_fn(n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let nrm = v.norm();
    v / Complex64::from(nrm)
}

/// Largest singular value of the operator `x -> apply(x)` (adjoint given by
/// `apply_adj`) by power iteration on `A* A`. Returns `None` when the
/// residual criterion is not met within the iteration budget.
pub fn power_norm<F, G>(n: usize, apply: F, apply_adj: G, opts: &PowerOptions) -> Option<f64>
where
    F: Fn(&CVec) -> CVec,
    G: Fn(&CVec) -> CVec,
{
    if n == 0 {
        return Some(0.0);
    }
    let mut v = start_vector(n);
    for _ in 0..opts.max_iterations {
        let w = apply_adj(&apply(&v));
        let theta = v.dotc(&w).re;
        let resid = (&w - &v * Complex64::from(theta)).norm();
        if resid <= opts.tol * theta.abs() {
            return Some(theta.max(0.0).sqrt());
        }
        let nrm = w.norm();
        if nrm == 0.0 {
            return Some(0.0);
        }
        v = w / Complex64::from(nrm);
    }
    None
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn hermitian_max_eigenvalue(h: &CMat) -> f64 {
    h.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Spectral norm `||m||_2`.
///
/// Power iteration on `m* m` with a fixed seed; if the residual test does not
/// pass within the budget (clustered top singular values), the largest
/// eigenvalue of `m* m` is computed densely instead.
pub fn operator_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let adj = m.adjoint();
    let opts = PowerOptions::default();
    if let Some(n) = power_norm(m.ncols(), |x| m * x, |x| &adj * x, &opts) {
        return n;
    }
    let gram = &adj * m;
    hermitian_max_eigenvalue(&gram).max(0.0).sqrt()
}

/// Spectral norm computed exactly from the Hermitian eigenproblem of `m* m`.
pub fn operator_norm_dense(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    hermitian_max_eigenvalue(&gram).max(0.0).sqrt()
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `m^k` by repeated squaring.
pub fn matrix_power(m: &CMat, mut k: usize) -> CMat {
    let mut result = identity(m.nrows());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn inverse(m: &CMat) -> Result<CMat, LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::DimensionMismatch(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let inv = m.clone().lu().try_inverse().ok_or(LinalgError::Singular)?;
    if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::Singular);
    }
    Ok(inv)
}

pub fn solve(m: &CMat, b: &CVec) -> Result<CVec, LinalgError> {
    let x = m.clone().lu().solve(b).ok_or(LinalgError::Singular)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::Singular);
    }
    Ok(x)
}

/// All eigenvalues via the complex Schur form, sorted by modulus
/// (descending), ties broken by argument.
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>, LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::DimensionMismatch(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 0).ok_or(LinalgError::ConvergenceFailure)?;
    let (_, t) = schur.unpack();
    let mut ev: Vec<Complex64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    sort_by_modulus(&mut ev);
    Ok(ev)
}

pub fn sort_by_modulus(ev: &mut [Complex64]) {
    ev.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then_with(|| a.arg().total_cmp(&b.arg()))
    });
}

/// Unitary DFT matrix `F_{jk} = n^{-1/2} exp(-2 pi i j k / n)`.
pub fn dft_matrix(n: usize) -> CMat {
    let scale = 1.0 / (n as f64).sqrt();
    CMat::from_fn(n, n, |j, k| {
        let phase = -std::f64::consts::TAU * ((j * k) % n) as f64 / n as f64;
        Complex64::from_polar(scale, phase)
    })
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest eigenvalue of the Hermitian part `(a + a*)/2`.
pub fn hermitian_part_max(a: &CMat) -> f64 {
    let h = (a + a.adjoint()) * Complex64::from(0.5);
    hermitian_max_eigenvalue(&h)
}
