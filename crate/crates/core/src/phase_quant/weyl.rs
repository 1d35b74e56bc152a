use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{PhaseError, Result, SymbolGrid, TorusOperator};
use crate::linalg::CMat;

/// Weyl quantization of a torus symbol on `C^N`, `h = 1/(2 pi N)`.
///
/// `entry(m, n) = (1/N) sum_l a(x_mid, l/N) exp(2 pi i l (m - n) / N)` where
/// `x_mid` is the midpoint of `x_m` and `x_n` along the shorter arc of the
/// circle, read off the doubled grid.
pub fn quantize_weyl(a: &SymbolGrid, n: usize) -> Result<TorusOperator> {
    if a.dim() != n {
        return Err(PhaseError::DimensionMismatch(format!("symbol has dim {}, target {}", a.dim(), n)));
    }
    if n == 0 {
        return Err(PhaseError::BadDimension("N must be positive".into()));
    }
    let first = a.values()[0];
    if a.values().iter().all(|&v| v == first) {
        return Ok(TorusOperator::new(CMat::identity(n, n) * first));
    }
    let inv = FftPlanner::<f64>::new().plan_fft_inverse(n);
    // kernel[s][d] = (1/N) sum_l a(s/2N, l/N) e^{2 pi i l d / N}
    let mut kernel = vec![Complex64::new(0.0, 0.0); 2 * n * n];
    for s in 0..2 * n {
        let row = &mut kernel[s * n..(s + 1) * n];
        for (l, z) in row.iter_mut().enumerate() {
            *z = a.at(s, l) / n as f64;
        }
        inv.process(row);
    }
    let entries = CMat::from_fn(n, n, |m, k| {
        let diff = m as i64 - k as i64;
        let mut s = m + k;
        if 2 * diff.unsigned_abs() as usize > n {
            s += n;
        }
        let d = diff.rem_euclid(n as i64) as usize;
        kernel[(s % (2 * n)) * n + d]
    });
    Ok(TorusOperator::new(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{operator_norm_dense, C1};
    use std::f64::consts::TAU;

    #[test]
    fn constant_symbol_is_scalar() {
        let c = Complex64::new(1.5, -0.25);
        for n in [1, 4, 9] {
            let op = quantize_weyl(&SymbolGrid::constant(n, c), n).unwrap();
            let diff = op.entries() - CMat::identity(n, n) * c;
            assert!(diff.camax() < 1e-14);
        }
    }

    #[test]
    fn real_symbol_hermitian() {
        for n in [8, 9] {
            let a = SymbolGrid::from_real_fn(n, |x, xi| (TAU * x).sin() * (TAU * xi).cos() + (TAU * (x + 2.0 * xi)).cos());
            let op = quantize_weyl(&a, n).unwrap();
            let m = op.entries();
            assert!((m - m.adjoint()).camax() < 1e-12);
        }
    }

    #[test]
    fn position_symbol_is_diagonal() {
        let n = 16;
        let a = SymbolGrid::from_real_fn(n, |x, _| (TAU * x).cos());
        let op = quantize_weyl(&a, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { (TAU * i as f64 / n as f64).cos() } else { 0.0 };
                assert!((op.entries()[(i, j)] - Complex64::new(expect, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn momentum_symbol_is_fourier_multiplier() {
        let n = 12;
        let a = SymbolGrid::from_real_fn(n, |_, xi| (TAU * xi).cos());
        let op = quantize_weyl(&a, n).unwrap();
        let f = crate::linalg::dft_matrix(n);
        let conj = &f * op.entries() * f.adjoint();
        for l in 0..n {
            assert!((conj[(l, l)] - C1 * (TAU * l as f64 / n as f64).cos()).norm() < 1e-12);
        }
        assert!((operator_norm_dense(op.entries()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_checked() {
        let a = SymbolGrid::constant(4, C1);
        assert!(matches!(quantize_weyl(&a, 5), Err(PhaseError::DimensionMismatch(_))));
    }
}
