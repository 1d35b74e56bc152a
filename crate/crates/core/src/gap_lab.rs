//! Power-norm scans, the Neumann resolvent identity, resolvent-norm bounds
//! and resonance spectra for families of open quantum maps `N -> M_N`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, CMat, LinalgError};
use crate::phase_quant::{apply_damping, PhaseError, SymbolGrid, TorusOperator};
use crate::stats::{linear_fit, proportional_fit};

#[derive(Debug, Error)]
pub enum GapError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("I - M^n is numerically singular (condition {cond:e})")]
    SingularPower { cond: f64 },
    #[error("I - M is singular at N = {n}, z = {z}: resonance on the scan point")]
    SingularResolvent { n: usize, z: Complex64 },
    #[error("dimension {dim} exceeds the spectrum cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("eigensolver did not converge")]
    ConvergenceFailure,
    #[error(transparent)]
    Operator(#[from] PhaseError),
}

impl From<LinalgError> for GapError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::ConvergenceFailure => GapError::ConvergenceFailure,
            other => GapError::Operator(other.into()),
        }
    }
}

pub type Result<T> = std::result::Result<T, GapError>;

/// Condition number above which `I - M^n` is treated as singular.
pub const SINGULAR_COND: f64 = 1e12;

/// Default dimension cap for dense spectra.
pub const SPECTRUM_CAP: usize = 2187;

/// `N(h) = ceil(delta log(1/h))`, at least 1.
pub fn n_of_h(delta: f64, h: f64) -> usize {
    ((delta * (1.0 / h).ln()).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub n: usize,
    pub h: f64,
    pub n_of_h: usize,
    pub power_norm: f64,
    pub amp_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub delta: f64,
    pub entries: Vec<GapEntry>,
    /// Least-squares `gamma` in `log(power_norm / amp_sup^N(h)) = gamma log h`;
    /// `None` when no point has a finite logarithm.
    pub fitted_gamma: Option<f64>,
    /// Slope of the same data when a constant prefactor is also fitted.
    pub gamma_with_prefactor: Option<f64>,
}

fn check_scan(delta: f64, ns: &[usize]) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(GapError::InvalidParameter("delta must be positive".into()));
    }
    if ns.is_empty() {
        return Err(GapError::InvalidParameter("list of dimensions is empty".into()));
    }
    Ok(())
}

/// `||M^{N(h)}||` across the family. The amplitude sup is measured as `||M||`.
pub fn power_norm_scan<F>(family: F, delta: f64, ns: &[usize]) -> Result<GapReport>
where
    F: Fn(usize) -> std::result::Result<TorusOperator, PhaseError> + Sync,
{
    check_scan(delta, ns)?;
    let entries = ns
        .par_iter()
        .map(|&n| {
            let m = family(n)?;
            let h = m.h();
            let k = n_of_h(delta, h);
            let power_norm = linalg::operator_norm(&linalg::matrix_power(m.entries(), k));
            Ok(GapEntry {
                n,
                h,
                n_of_h: k,
                power_norm,
                amp_sup: m.norm(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = entries
        .iter()
        .map(|e| (e.h.ln(), e.power_norm.ln() - e.n_of_h as f64 * e.amp_sup.ln()))
        .collect();
    Ok(GapReport {
        delta,
        entries,
        fitted_gamma: proportional_fit(&pts),
        gamma_with_prefactor: linear_fit(&pts).map(|f| f.slope),
    })
}

#[derive(Debug, Clone)]
pub struct NeumannResolvent {
    /// `(sum_{k<n} M^k)(I - M^n)^{-1}`.
    pub resolvent: CMat,
    /// `||(I - M) R - I||`.
    pub residual: f64,
    /// `||I - M|| ||R||`.
    pub cond: f64,
    /// Condition number of `I - M^n`.
    pub cond_power: f64,
}

pub fn neumann_resolvent(m: &TorusOperator, n: usize) -> Result<NeumannResolvent> {
    if n == 0 {
        return Err(GapError::InvalidParameter("n must be at least 1".into()));
    }
    let a = m.entries();
    let dim = m.dim();
    let id = linalg::identity(dim);
    let mut sum = id.clone();
    let mut pow = id.clone();
    for _ in 1..n {
        pow = &pow * a;
        sum += &pow;
    }
    pow = &pow * a;
    let i_minus_pow = &id - &pow;
    let inv = linalg::inverse(&i_minus_pow).map_err(|_| GapError::SingularPower { cond: f64::INFINITY })?;
    let cond_power = linalg::operator_norm(&i_minus_pow) * linalg::operator_norm(&inv);
    if !(cond_power <= SINGULAR_COND) {
        return Err(GapError::SingularPower { cond: cond_power });
    }
    let resolvent = &sum * &inv;
    let i_minus_m = &id - a;
    let residual = linalg::operator_norm(&(&i_minus_m * &resolvent - &id));
    let cond = linalg::operator_norm(&i_minus_m) * linalg::operator_norm(&resolvent);
    Ok(NeumannResolvent {
        resolvent,
        residual,
        cond,
        cond_power,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ResolventScanOptions {
    pub delta: f64,
    pub gamma: f64,
    /// Bound is only enforced for `h <= h0`.
    pub h0: f64,
    /// Constant return time used in the damping factor.
    pub return_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventEntry {
    pub n: usize,
    pub h: f64,
    /// Spectral parameter in units of `h`.
    pub z: Complex64,
    pub norm: f64,
    pub bound: f64,
    pub amp_sup: f64,
    /// `max(1, amp_sup)`.
    pub a: f64,
    pub hypothesis_ok: bool,
}

impl ResolventEntry {
    pub fn is_violation(&self, h0: f64) -> bool {
        self.hypothesis_ok && self.h <= h0 && self.norm > self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventReport {
    pub delta: f64,
    pub gamma: f64,
    pub h0: f64,
    pub entries: Vec<ResolventEntry>,
}

impl ResolventReport {
    pub fn violations(&self) -> Vec<&ResolventEntry> {
        self.entries.iter().filter(|e| e.is_violation(self.h0)).collect()
    }
}

/// `2 delta |log h| h^{-delta log A}`.
pub fn resolvent_bound(delta: f64, h: f64, a: f64) -> f64 {
    2.0 * delta * h.ln().abs() * h.powf(-delta * a.ln())
}

/// `||(I - M_z)^{-1}||` with `M_z = M Op(exp(i z t / h))` and `z` given in
/// units of `h`, so a constant return time `t` multiplies `M` by
/// `exp(i z t)`.
pub fn resolvent_norm_scan<F>(family: F, opts: &ResolventScanOptions, ns: &[usize], zs: &[Complex64]) -> Result<ResolventReport>
where
    F: Fn(usize) -> std::result::Result<TorusOperator, PhaseError> + Sync,
{
    check_scan(opts.delta, ns)?;
    if zs.is_empty() {
        return Err(GapError::InvalidParameter("list of z values is empty".into()));
    }
    if !(opts.return_time > 0.0) {
        return Err(GapError::InvalidParameter("return time must be positive".into()));
    }
    let per_n = ns
        .par_iter()
        .map(|&n| {
            let m = family(n)?;
            let h = m.h();
            let t = SymbolGrid::constant(n, Complex64::new(opts.return_time, 0.0));
            zs.iter()
                .map(|&zeta| {
                    let mz = apply_damping(&m, zeta * h, &t)?;
                    let amp_sup = mz.norm();
                    let a = amp_sup.max(1.0);
                    let i_minus = linalg::identity(n) - mz.entries();
                    let inv = linalg::inverse(&i_minus).map_err(|_| GapError::SingularResolvent { n, z: zeta })?;
                    let norm = linalg::operator_norm(&inv);
                    if !norm.is_finite() || norm > 1.0 / f64::EPSILON {
                        return Err(GapError::SingularResolvent { n, z: zeta });
                    }
                    Ok(ResolventEntry {
                        n,
                        h,
                        z: zeta,
                        norm,
                        bound: resolvent_bound(opts.delta, h, a),
                        amp_sup,
                        a,
                        hypothesis_ok: amp_sup < (opts.gamma / opts.delta).exp(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResolventReport {
        delta: opts.delta,
        gamma: opts.gamma,
        h0: opts.h0,
        entries: per_n.into_iter().flatten().collect(),
    })
}

/// All eigenvalues, sorted by modulus (descending).
pub fn spectrum(m: &TorusOperator, cap: usize) -> Result<Vec<Complex64>> {
    if m.dim() > cap {
        return Err(GapError::TooLarge { dim: m.dim(), cap });
    }
    Ok(linalg::eigenvalues(m.entries())?)
}
