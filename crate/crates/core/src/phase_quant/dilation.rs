use num_complex::Complex64;

use super::{PhaseError, Result, TorusOperator};
use crate::linalg::CMat;

/// Classical model `F(x, xi) = (x/2, 2 xi)` on `]-1,1[^2`.
pub fn dilation_classical(x: f64, xi: f64) -> (f64, f64) {
    (0.5 * x, 2.0 * xi)
}

fn in_departure(x: f64, xi: f64) -> bool {
    x.abs() < 1.0 && xi.abs() < 0.5
}

fn in_arrival(x: f64, xi: f64) -> bool {
    x.abs() < 0.5 && xi.abs() < 1.0
}

/// Whether `(x, xi)` stays in the departure set for `n` forward steps and in
/// the arrival set for `n` backward steps.
pub fn dilation_survives(x: f64, xi: f64, n: usize) -> bool {
    let (mut fx, mut fxi) = (x, xi);
    let (mut bx, mut bxi) = (x, xi);
    for _ in 0..n {
        if !in_departure(fx, fxi) || !in_arrival(bx, bxi) {
            return false;
        }
        (fx, fxi) = dilation_classical(fx, fxi);
        (bx, bxi) = (2.0 * bx, 0.5 * bxi);
    }
    true
}

/// `C^inf` cutoff equal to 1 on `|y| <= a - w`, 0 on `|y| >= a`.
pub fn smooth_cutoff(y: f64, a: f64, w: f64) -> f64 {
    let t = (y.abs() - (a - w)) / w;
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let bump = |u: f64| (-1.0 / u).exp();
    bump(1.0 - t) / (bump(1.0 - t) + bump(t))
}

/// Quantized dilation on the torus `[-1/2, 1/2)^2`, the model square scaled
/// by one half.
///
/// A state is cut off in momentum to the departure band, dilated by
/// `psi(x) -> sqrt(2) psi(2x)` through exact evaluation of its discrete
/// Fourier transform at half-integer momenta, then cut off in position to
/// the arrival band. `cutoff` is the width of the smooth transitions in torus
/// units. The result is close to, but not exactly, a partial isometry.
pub fn dilation_model(n: usize, cutoff: f64) -> Result<TorusOperator> {
    if n < 8 {
        return Err(PhaseError::BadDimension("N must be at least 8".into()));
    }
    if !(cutoff > 0.0 && cutoff < 0.25) {
        return Err(PhaseError::BadDimension("cutoff width must lie in (0, 1/4)".into()));
    }
    let nf = n as f64;
    let coord = |k: usize| (k as f64 - (n / 2) as f64) / nf;
    let chi_x: Vec<f64> = (0..n).map(|k| smooth_cutoff(coord(k), 0.25, cutoff)).collect();
    let chi_xi: Vec<f64> = (0..n).map(|l| smooth_cutoff(0.5 * coord(l), 0.25, cutoff)).collect();
    let tau = std::f64::consts::TAU;
    let scale = 1.0 / (nf * std::f64::consts::SQRT_2);
    let m = CMat::from_fn(n, n, |k, kp| {
        if chi_x[k] == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (x, xp) = (coord(k), coord(kp));
        let sum: Complex64 = (0..n)
            .filter(|&l| chi_xi[l] != 0.0)
            .map(|l| {
                let xi = coord(l);
                Complex64::from_polar(chi_xi[l], tau * nf * xi * (x - 0.5 * xp))
            })
            .sum();
        sum * (scale * chi_x[k])
    });
    Ok(TorusOperator::new(m))
}
