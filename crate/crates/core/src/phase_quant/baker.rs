use num_complex::Complex64;

use super::{PhaseError, Result, TorusOperator};
use crate::linalg::{dft_matrix, CMat};

/// Classical triadic baker: the momentum band `b = floor(3 xi)` is sent to
/// the position band `b`, `(x, xi) -> ((b + x)/3, 3 xi - b)`.
pub fn baker_classical(x: f64, xi: f64) -> (f64, f64) {
    let b = (3.0 * xi).floor().clamp(0.0, 2.0);
    ((b + x) / 3.0, 3.0 * xi - b)
}

fn check(n: usize) -> Result<()> {
    if n == 0 || n % 3 != 0 {
        return Err(PhaseError::BadDimension("N must be divisible by 3".into()));
    }
    Ok(())
}

/// `blockdiag(F*_{N/3}, ...) F_N`, with the blocks listed in `keep` present
/// and the others zero.
fn assemble(n: usize, keep: [bool; 3]) -> CMat {
    let m = n / 3;
    let f_small_inv = dft_matrix(m).adjoint();
    let f = dft_matrix(n);
    let mut out = CMat::from_element(n, n, Complex64::new(0.0, 0.0));
    for (b, &on) in keep.iter().enumerate() {
        if !on {
            continue;
        }
        let rows = f.rows(b * m, m);
        out.rows_mut(b * m, m).copy_from(&(&f_small_inv * rows));
    }
    out
}

/// Unitary quantization of the closed baker.
pub fn baker_closed(n: usize) -> Result<TorusOperator> {
    check(n)?;
    Ok(TorusOperator::new(assemble(n, [true, true, true])))
}

/// Open baker: the middle momentum band is discarded, so the surviving
/// states leave from `xi in ]0,1/3[ u ]2/3,1[` and land in
/// `x in ]0,1/3[ u ]2/3,1[`.
pub fn baker_open(n: usize) -> Result<TorusOperator> {
    check(n)?;
    Ok(TorusOperator::new(assemble(n, [true, false, true])))
}
