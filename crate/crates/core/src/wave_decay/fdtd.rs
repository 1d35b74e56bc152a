use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Result, WaveError};
use crate::geometry::{ObstacleConfig, Vec2};
use crate::stats::loglog_slope;

/// Parameters from which a [`WaveGrid`] is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveGridSpec {
    /// Side of the square `[-extent/2, extent/2]^2`.
    pub extent: f64,
    /// Cells per side.
    pub nx: usize,
    /// `dt = courant * dx`; stable for `courant <= 1/sqrt 2`.
    pub courant: f64,
    /// Sponge thickness in cells.
    pub absorber_width: usize,
    /// Peak damping rate of the sponge.
    pub absorber_strength: f64,
    /// Exponent of the polynomial damping ramp.
    pub absorber_power: i32,
}

impl Default for WaveGridSpec {
    fn default() -> Self {
        Self {
            extent: 160.0,
            nx: 512,
            courant: 0.5,
            absorber_width: 48,
            absorber_strength: 3.0,
            absorber_power: 3,
        }
    }
}

/// Cell-centered square lattice with a staircase Dirichlet mask and a
/// sponge layer along the outer edge.
#[derive(Debug, Clone)]
pub struct WaveGrid {
    pub extent: f64,
    pub nx: usize,
    pub dx: f64,
    pub dt: f64,
    /// `true` for cells whose center lies inside an obstacle.
    pub mask: Vec<bool>,
    pub absorber_width: usize,
    /// Damping rate per cell, zero outside the sponge.
    pub sigma: Vec<f64>,
}

impl WaveGrid {
    pub fn new(spec: &WaveGridSpec, config: Option<&ObstacleConfig>) -> Result<Self> {
        if !(spec.extent > 0.0 && spec.extent.is_finite()) || spec.nx < 8 {
            return Err(WaveError::InvalidParameter("extent must be positive and nx >= 8".into()));
        }
        if 2 * spec.absorber_width >= spec.nx {
            return Err(WaveError::InvalidParameter("absorber wider than half the grid".into()));
        }
        if !(spec.absorber_strength >= 0.0) {
            return Err(WaveError::InvalidParameter("absorber strength must be nonnegative".into()));
        }
        let dx = spec.extent / spec.nx as f64;
        let dt = spec.courant * dx;
        let limit = dx / std::f64::consts::SQRT_2;
        if !(dt > 0.0 && dt <= limit) {
            return Err(WaveError::CflViolation { dt, limit });
        }
        let n = spec.nx;
        let mut grid = Self {
            extent: spec.extent,
            nx: n,
            dx,
            dt,
            mask: vec![false; n * n],
            absorber_width: spec.absorber_width,
            sigma: vec![0.0; n * n],
        };
        let w = spec.absorber_width;
        for i in 0..n {
            for j in 0..n {
                let p = grid.center(i, j);
                if let Some(cfg) = config {
                    grid.mask[i * n + j] = cfg.obstacles().iter().any(|o| o.contains(p));
                }
                if w > 0 {
                    let edge = i.min(j).min(n - 1 - i).min(n - 1 - j);
                    if edge < w {
                        let depth = (w - edge) as f64 / w as f64;
                        grid.sigma[i * n + j] = spec.absorber_strength * depth.powi(spec.absorber_power);
                    }
                }
            }
        }
        Ok(grid)
    }

    /// Center of cell `(i, j)`; `i` indexes `y`, `j` indexes `x`.
    pub fn center(&self, i: usize, j: usize) -> Vec2 {
        let h = 0.5 * self.extent;
        Vec2::new(-h + (j as f64 + 0.5) * self.dx, -h + (i as f64 + 0.5) * self.dx)
    }

    /// Distance from the origin to the inner edge of the sponge.
    pub fn absorber_distance(&self) -> f64 {
        0.5 * self.extent - self.absorber_width as f64 * self.dx
    }

    fn laplacian_at(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let n = self.nx;
        let c = u[i * n + j];
        let up = if i + 1 < n { u[(i + 1) * n + j] } else { 0.0 };
        let dn = if i > 0 { u[(i - 1) * n + j] } else { 0.0 };
        let rt = if j + 1 < n { u[i * n + j + 1] } else { 0.0 };
        let lt = if j > 0 { u[i * n + j - 1] } else { 0.0 };
        (up + dn + rt + lt - 4.0 * c) / (self.dx * self.dx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseKind {
    /// Gaussian `u(0)`, `du/dt(0) = 0`.
    Displacement,
    /// `u(0) = 0`, Gaussian `du/dt(0)`.
    Velocity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub time: f64,
}

impl WaveState {
    /// Gaussian of width `width` centered at `center`, cut to zero beyond
    /// `6 * width` and on masked cells.
    pub fn pulse(grid: &WaveGrid, center: Vec2, width: f64, kind: PulseKind) -> Self {
        let n = grid.nx;
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = grid.center(i, j) - center;
                let r2 = d.dot(d);
                if r2 <= 36.0 * width * width && !grid.mask[i * n + j] {
                    g[i * n + j] = (-0.5 * r2 / (width * width)).exp();
                }
            }
        }
        let zero = vec![0.0; n * n];
        match kind {
            PulseKind::Displacement => Self { u: g, v: zero, time: 0.0 },
            PulseKind::Velocity => Self { u: zero, v: g, time: 0.0 },
        }
    }

    /// Radius of the smallest origin-centered disc containing the support.
    pub fn support_radius(&self, grid: &WaveGrid) -> f64 {
        let n = grid.nx;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if self.u[i * n + j] != 0.0 || self.v[i * n + j] != 0.0 {
                    r = r.max(grid.center(i, j).norm() + 0.5 * std::f64::consts::SQRT_2 * grid.dx);
                }
            }
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdtdOptions {
    pub t_final: f64,
    /// Probe radius of the local energy.
    pub r: f64,
    /// Steps between energy samples.
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub t: f64,
    pub e_r: f64,
    pub e_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub r: f64,
    pub samples: Vec<EnergySample>,
    /// Log-log slope of `E_R` against `t` over `[T/4, T]`.
    pub fitted_slope: Option<f64>,
    /// Earliest time at which the initial data can reach the sponge.
    pub absorber_arrival: f64,
}

/// `(E_R, E_total)` at an integer time level, given the staggered
/// velocities `v_lo = v^{n-1/2}` and `v_hi = v^{n+1/2}`.
///
/// Both use `|grad u|^2` on cell faces. `E_R` takes the centered velocity
/// `(v_lo + v_hi)/2` over cells and faces within distance `r` of the origin.
/// `E_total` takes `v_lo * v_hi` over the whole grid, which is the energy the
/// leapfrog scheme conserves exactly when there is no damping.
fn energies(grid: &WaveGrid, u: &[f64], v_lo: &[f64], v_hi: &[f64], r: f64) -> (f64, f64) {
    let n = grid.nx;
    let area = grid.dx * grid.dx;
    let r2 = r * r;
    let half = 0.5 * grid.extent;
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (mut er, mut et) = (0.0, 0.0);
            let y = -half + (i as f64 + 0.5) * grid.dx;
            for j in 0..n {
                let x = -half + (j as f64 + 0.5) * grid.dx;
                let k = i * n + j;
                let c = u[k];
                let vc = 0.5 * (v_lo[k] + v_hi[k]);
                et += v_lo[k] * v_hi[k] * area;
                if x * x + y * y <= r2 {
                    er += vc * vc * area;
                }
                if j + 1 < n {
                    let g = u[k + 1] - c;
                    let xm = x + 0.5 * grid.dx;
                    et += g * g;
                    if xm * xm + y * y <= r2 {
                        er += g * g;
                    }
                }
                if i + 1 < n {
                    let g = u[k + n] - c;
                    let ym = y + 0.5 * grid.dx;
                    et += g * g;
                    if x * x + ym * ym <= r2 {
                        er += g * g;
                    }
                }
            }
            (er, et)
        })
        .collect();
    rows.iter().fold((0.0, 0.0), |acc, &(a, b)| (acc.0 + a, acc.1 + b))
}

/// `v <- [(1 - sigma dt/2) v + dt Δu] / (1 + sigma dt/2)` with time step `dt`.
fn update_velocity(grid: &WaveGrid, u: &[f64], v: &mut [f64], dt: f64) {
    let n = grid.nx;
    v.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, vj) in row.iter_mut().enumerate() {
            let k = i * n + j;
            if grid.mask[k] {
                *vj = 0.0;
                continue;
            }
            let s = 0.5 * grid.sigma[k] * dt;
            *vj = ((1.0 - s) * *vj + dt * grid.laplacian_at(u, i, j)) / (1.0 + s);
        }
    });
}

fn update_position(grid: &WaveGrid, u: &mut [f64], v: &[f64]) {
    let n = grid.nx;
    let dt = grid.dt;
    u.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, uj) in row.iter_mut().enumerate() {
            let k = i * n + j;
            *uj = if grid.mask[k] { 0.0 } else { *uj + dt * v[k] };
        }
    });
}

/// Leapfrog integration of `u_tt = Δu` outside the masked cells up to
/// `t_final`, sampling the local energy in `B(0, r)` every `stride` steps.
pub fn fdtd_run(grid: &WaveGrid, data: &WaveState, opts: &FdtdOptions) -> Result<EnergyTrace> {
    let n = grid.nx;
    if data.u.len() != n * n || data.v.len() != n * n {
        return Err(WaveError::DimensionMismatch("state does not match the grid".into()));
    }
    if !(opts.t_final > 0.0) || !(opts.r > 0.0) || opts.stride == 0 {
        return Err(WaveError::InvalidParameter("t_final, r and stride must be positive".into()));
    }
    let support = data.support_radius(grid);
    if support > opts.r {
        return Err(WaveError::InvalidParameter(format!(
            "initial data reaches radius {support:.3}, outside the probe ball of radius {}",
            opts.r
        )));
    }
    let scale = data
        .u
        .iter()
        .chain(&data.v)
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let dt = grid.dt;
    let steps = (opts.t_final / dt).ceil() as usize;
    let mut u = data.u.clone();
    let mut v = data.v.clone();
    for (k, &m) in grid.mask.iter().enumerate() {
        if m {
            u[k] = 0.0;
            v[k] = 0.0;
        }
    }
    // half step to v^{1/2}; v^{-1/2} is its mirror image about v^0
    let v0 = v.clone();
    update_velocity(grid, &u, &mut v, 0.5 * dt);
    let v_back: Vec<f64> = v0.iter().zip(&v).map(|(a, b)| 2.0 * a - b).collect();
    let (er, et) = energies(grid, &u, &v_back, &v, opts.r);
    let mut samples = vec![EnergySample {
        t: data.time,
        e_r: er,
        e_total: et,
    }];
    let mut v_prev = Vec::new();
    for step in 1..=steps {
        update_position(grid, &mut u, &v);
        let sample = step % opts.stride == 0 || step == steps;
        if sample {
            v_prev.clone_from(&v);
        }
        update_velocity(grid, &u, &mut v, dt);
        if sample {
            let t = data.time + step as f64 * dt;
            let umax = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if !umax.is_finite() || umax > 1e6 * scale {
                return Err(WaveError::UnstableBlowup { time: t });
            }
            let (er, et) = energies(grid, &u, &v_prev, &v, opts.r);
            samples.push(EnergySample { t, e_r: er, e_total: et });
        }
    }
    let t_end = samples.last().map_or(opts.t_final, |s| s.t);
    let window: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.t >= 0.25 * t_end && s.t > 0.0)
        .map(|s| (s.t, s.e_r))
        .collect();
    Ok(EnergyTrace {
        r: opts.r,
        samples,
        fitted_slope: loglog_slope(&window),
        absorber_arrival: (grid.absorber_distance() - support).max(0.0),
    })
}
