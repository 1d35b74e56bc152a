use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{PhaseError, Result};

/// Samples of a symbol `a(x, xi)` on the unit torus.
///
/// Positions are stored on the doubled grid `x_k = k / (2N)`,
/// `k = 0..2N`, so Weyl midpoints `(x_m + x_n) / 2` are exact grid points.
/// Momenta sit on `xi_l = l / N`. Even rows are the ordinary `N x N` lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    dim: usize,
    values: Vec<Complex64>,
}

impl SymbolGrid {
    pub fn from_fn(dim: usize, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(2 * dim * dim);
        for k in 0..2 * dim {
            let x = k as f64 / (2 * dim) as f64;
            for l in 0..dim {
                values.push(f(x, l as f64 / dim as f64));
            }
        }
        Self { dim, values }
    }

    pub fn from_real_fn(dim: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(dim, |x, xi| Complex64::new(f(x, xi), 0.0))
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self {
            dim,
            values: vec![c; 2 * dim * dim],
        }
    }

    /// Builds the doubled grid from samples on the `N x N` lattice
    /// (`values[k][l] = a(k/N, l/N)`), filling the half-integer positions by
    /// periodic trigonometric interpolation in `x`.
    pub fn from_lattice(values: &[Vec<Complex64>]) -> Result<Self> {
        let n = values.len();
        if n == 0 || values.iter().any(|row| row.len() != n) {
            return Err(PhaseError::DimensionMismatch("lattice must be N x N".into()));
        }
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(2 * n);
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * n * n];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        let mut padded = vec![Complex64::new(0.0, 0.0); 2 * n];
        for l in 0..n {
            for k in 0..n {
                col[k] = values[k][l];
            }
            fwd.process(&mut col);
            padded.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            // keep frequencies -n/2..n/2, splitting the Nyquist term evenly
            let half = n / 2;
            for f in 0..n {
                let c = col[f] / n as f64;
                if n % 2 == 0 && f == half {
                    padded[half] += c * 0.5;
                    padded[2 * n - half] += c * 0.5;
                } else if f < half || (n % 2 == 1 && f == half) {
                    padded[f] += c;
                } else {
                    padded[2 * n - (n - f)] += c;
                }
            }
            inv.process(&mut padded);
            for k in 0..2 * n {
                out[k * n + l] = padded[k];
            }
        }
        Ok(Self { dim: n, values: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Value at doubled-grid position `k` (`x = k / 2N`) and momentum `l`.
    pub fn at(&self, k: usize, l: usize) -> Complex64 {
        self.values[(k % (2 * self.dim)) * self.dim + (l % self.dim)]
    }

    /// Value at the lattice point `(k/N, l/N)`.
    pub fn lattice_value(&self, k: usize, l: usize) -> Complex64 {
        self.at(2 * k, l)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            dim: self.dim,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn zip_with(&self, other: &SymbolGrid, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(PhaseError::DimensionMismatch(format!("{} vs {}", self.dim, other.dim)));
        }
        Ok(Self {
            dim: self.dim,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|z| z.im.abs() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn interpolation_reproduces_trig_polynomials() {
        for n in [6, 7] {
            let f = |x: f64, xi: f64| Complex64::new((TAU * x).cos() + 0.3 * (2.0 * TAU * x).sin() * (TAU * xi).cos(), 0.0);
            let lattice: Vec<Vec<Complex64>> = (0..n)
                .map(|k| (0..n).map(|l| f(k as f64 / n as f64, l as f64 / n as f64)).collect())
                .collect();
            let grid = SymbolGrid::from_lattice(&lattice).unwrap();
            let direct = SymbolGrid::from_fn(n, f);
            for (a, b) in grid.values().iter().zip(direct.values()) {
                assert!((a - b).norm() < 1e-12, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ragged_lattice_rejected() {
        let bad = vec![vec![Complex64::new(0.0, 0.0); 3], vec![Complex64::new(0.0, 0.0); 2]];
        assert!(SymbolGrid::from_lattice(&bad).is_err());
    }
}
