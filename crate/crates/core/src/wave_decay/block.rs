use num_complex::Complex64;

use super::{Result, WaveError};
use crate::linalg::CMat;

/// Cutoff resolvent of the wave generator `[[0, I], [Δ, 0]]` written through
/// the scalar cutoff resolvent `R = (-Δ - λ²)^{-1}`:
///
/// ```text
/// [[ iλ χRχ,          -χRχ  ],
///  [ χ² + λ² χRχ,    iλ χRχ ]]
/// ```
///
/// `chi` holds the diagonal of the cutoff.
pub fn generator_block_resolvent(lambda: Complex64, r: &CMat, chi: &[f64]) -> Result<CMat> {
    let n = chi.len();
    if r.nrows() != n || r.ncols() != n {
        return Err(WaveError::DimensionMismatch(format!(
            "resolvent is {}x{}, cutoff has {} entries",
            r.nrows(),
            r.ncols(),
            n
        )));
    }
    let crc = CMat::from_fn(n, n, |i, j| r[(i, j)] * (chi[i] * chi[j]));
    let il = Complex64::i() * lambda;
    let mut out = CMat::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&(&crc * il));
    out.view_mut((0, n), (n, n)).copy_from(&(-&crc));
    let mut lower = &crc * (lambda * lambda);
    for i in 0..n {
        lower[(i, i)] += Complex64::new(chi[i] * chi[i], 0.0);
    }
    out.view_mut((n, 0), (n, n)).copy_from(&lower);
    out.view_mut((n, n), (n, n)).copy_from(&(&crc * il));
    Ok(out)
}
