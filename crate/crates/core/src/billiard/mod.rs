//! Open billiard map `B+` and shadow map `B-` between disc obstacles.
//!
//! Phase points live on the coball bundle of each boundary: an obstacle
//! index, an arclength `s` and the tangential component `eta` of the unit
//! outgoing direction. In these coordinates the billiard map preserves
//! `ds ^ d eta`, so `det DF = 1`.

mod cover;
mod orbit;

pub use cover::{
    cover_dimension, lyapunov_from_cover, trapped_set_cover, trapped_set_covers, CoverBox, CoverOptions,
    TrappedSetCover,
};
pub use orbit::{find_periodic_orbit, lyapunov_estimate, OrbitOptions, PeriodicOrbit};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BoundaryChart, GeometryError, ObstacleConfig, Vec2};

#[derive(Debug, Error)]
pub enum BilliardError {
    #[error("glancing ray (|eta| = 1 or tangent intersection)")]
    Glancing,
    #[error("ray escapes without hitting an obstacle")]
    NoHit,
    #[error("finite-difference stencil crosses the escape or glancing boundary")]
    NearGlancing,
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no phase point survived long enough to estimate the expansion rate")]
    NoSurvivors,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, BilliardError>;

/// Default discriminant threshold below which a ray counts as tangent.
pub const GLANCING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPhasePoint {
    pub obstacle: usize,
    pub s: f64,
    pub eta: f64,
}

impl BoundaryPhasePoint {
    pub fn new(obstacle: usize, s: f64, eta: f64) -> Self {
        Self { obstacle, s, eta }
    }

    /// Same base point, tangential momentum negated.
    pub fn reversed(self) -> Self {
        Self { eta: -self.eta, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    HitPlus,
    HitMinus,
    Escape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilliardStep {
    pub kind: StepKind,
    pub target: Option<usize>,
    pub arrival: Option<BoundaryPhasePoint>,
    /// Flight time (unit speed). Zero for escapes.
    pub time: f64,
    /// Shadow steps only: another obstacle sits on the chord before the exit
    /// point. Cannot happen under the no-eclipse condition.
    pub occluded: bool,
}

impl BilliardStep {
    fn escape() -> Self {
        Self {
            kind: StepKind::Escape,
            target: None,
            arrival: None,
            time: 0.0,
            occluded: false,
        }
    }

    pub fn is_hit(&self) -> bool {
        self.kind != StepKind::Escape
    }
}

/// Billiard dynamics on a fixed configuration.
#[derive(Debug, Clone)]
pub struct Billiard<'a> {
    config: &'a ObstacleConfig,
    glancing_tol: f64,
}

impl<'a> Billiard<'a> {
    pub fn new(config: &'a ObstacleConfig) -> Self {
        Self {
            config,
            glancing_tol: GLANCING_TOL,
        }
    }

    pub fn with_glancing_tol(mut self, tol: f64) -> Self {
        self.glancing_tol = tol;
        self
    }

    pub fn config(&self) -> &ObstacleConfig {
        self.config
    }

    /// Wraps `s` into `[0, perimeter)` of the point's obstacle.
    pub fn normalize(&self, rho: BoundaryPhasePoint) -> BoundaryPhasePoint {
        let p = self.config.get(rho.obstacle).perimeter();
        BoundaryPhasePoint {
            s: rho.s.rem_euclid(p),
            ..rho
        }
    }

    /// Base point and outgoing unit direction of `rho`.
    pub fn lift(&self, rho: BoundaryPhasePoint) -> Result<(Vec2, Vec2)> {
        if !(rho.eta.abs() < 1.0) {
            return Err(BilliardError::Glancing);
        }
        let ob = self.config.get(rho.obstacle);
        let x = ob.point(rho.s);
        let dir = ob.tangent(rho.s) * rho.eta + ob.outward_normal(rho.s) * (1.0 - rho.eta * rho.eta).sqrt();
        Ok((x, dir))
    }

    pub fn step(&self, rho: BoundaryPhasePoint, branch: Branch) -> Result<BilliardStep> {
        let (x, v) = self.lift(rho)?;
        // (obstacle, entry time, exit time)
        let mut best: Option<(usize, f64, f64)> = None;
        let mut glance: Option<f64> = None;
        for (i, ob) in self.config.obstacles().iter().enumerate() {
            if i == rho.obstacle {
                continue;
            }
            let w = x - ob.center;
            let b = v.dot(w);
            let c = w.dot(w) - ob.radius * ob.radius;
            let disc = b * b - c;
            if -b <= 0.0 || disc < -self.glancing_tol {
                continue;
            }
            if disc <= self.glancing_tol {
                let t = -b;
                if glance.is_none_or(|g| t < g) {
                    glance = Some(t);
                }
                continue;
            }
            let sq = disc.sqrt();
            // c > 0 outside the disc, so the product of roots is positive
            let t_in = c / (-b + sq);
            let t_out = -b + sq;
            if best.is_none_or(|(_, t, _)| t_in < t) {
                best = Some((i, t_in, t_out));
            }
        }
        if let Some(tg) = glance {
            if best.is_none_or(|(_, t, _)| tg < t) {
                return Err(BilliardError::Glancing);
            }
        }
        let Some((target, t_in, t_out)) = best else {
            return Ok(BilliardStep::escape());
        };
        let (t, kind) = match branch {
            Branch::Plus => (t_in, StepKind::HitPlus),
            Branch::Minus => (t_out, StepKind::HitMinus),
        };
        let ob = self.config.get(target);
        let y = x + v * t;
        let s = ob.arclength_of(y);
        let eta = v.dot(ob.tangent(s)).clamp(-1.0, 1.0);
        let occluded = branch == Branch::Minus && self.blocked_before(x, v, t, rho.obstacle, target);
        Ok(BilliardStep {
            kind,
            target: Some(target),
            arrival: Some(BoundaryPhasePoint::new(target, s, eta)),
            time: t,
            occluded,
        })
    }

    fn blocked_before(&self, x: Vec2, v: Vec2, t_max: f64, from: usize, target: usize) -> bool {
        self.config.obstacles().iter().enumerate().any(|(k, ob)| {
            if k == from || k == target {
                return false;
            }
            let w = x - ob.center;
            let b = v.dot(w);
            let c = w.dot(w) - ob.radius * ob.radius;
            let disc = b * b - c;
            disc > 0.0 && -b > 0.0 && c / (-b + disc.sqrt()) < t_max
        })
    }

    /// `B+` as a partial map; `None` on escape.
    pub fn forward(&self, rho: BoundaryPhasePoint) -> Result<Option<BoundaryPhasePoint>> {
        Ok(self.step(rho, Branch::Plus)?.arrival)
    }

    /// Inverse of `B+` via time reversal.
    pub fn backward(&self, rho: BoundaryPhasePoint) -> Result<Option<BoundaryPhasePoint>> {
        Ok(self.forward(rho.reversed())?.map(BoundaryPhasePoint::reversed))
    }

    /// Return time `t(rho)` to the next obstacle.
    pub fn flight_time(&self, rho: BoundaryPhasePoint) -> Result<f64> {
        let st = self.step(rho, Branch::Plus)?;
        if st.is_hit() {
            Ok(st.time)
        } else {
            Err(BilliardError::NoHit)
        }
    }

    /// `d(s', eta') / d(s, eta)` of `B+`, from [`Self::jacobian_analytic`].
    pub fn jacobian(&self, rho: BoundaryPhasePoint) -> Result<Matrix2<f64>> {
        self.jacobian_analytic(rho, Branch::Plus)
    }

    /// Finite-difference Jacobian of `B+`. The step is halved from `1e-2`
    /// until two successive stencils agree, then Richardson-extrapolated.
    pub fn jacobian_fd(&self, rho: BoundaryPhasePoint) -> Result<Matrix2<f64>> {
        let mut h = 1e-2;
        let mut coarse = self.jacobian_with_step(rho, h);
        let mut best = None;
        while h > 1e-5 {
            h *= 0.5;
            let fine = self.jacobian_with_step(rho, h);
            if let (Ok(c), Ok(f)) = (&coarse, &fine) {
                let diff = (f - c).abs().max();
                let estimate = f + (f - c) / 15.0;
                if diff <= 1e-10 * f.abs().max().max(1.0) {
                    return Ok(estimate);
                }
                if best.is_none_or(|(d, _)| diff < d) {
                    best = Some((diff, estimate));
                }
            }
            coarse = fine;
        }
        best.map(|(_, j)| j).ok_or(BilliardError::NearGlancing)
    }

    /// Fourth-order central differences with step `base_step` in both
    /// coordinates.
    /// Fails with `NearGlancing` if any stencil point escapes or lands on
    /// another obstacle.
    pub fn jacobian_with_step(&self, rho: BoundaryPhasePoint, base_step: f64) -> Result<Matrix2<f64>> {
        let center = self.step(rho, Branch::Plus)?;
        let Some(arr) = center.arrival else {
            return Err(BilliardError::NoHit);
        };
        let perim = self.config.get(arr.obstacle).perimeter();
        let mut jac = Matrix2::zeros();
        for col in 0..2 {
            let h = base_step;
            let image = |offset: f64| -> Result<(f64, f64)> {
                let mut p = rho;
                if col == 0 {
                    p.s += offset * h;
                } else {
                    p.eta += offset * h;
                }
                match self.step(p, Branch::Plus) {
                    Ok(BilliardStep {
                        arrival: Some(a), ..
                    }) if a.obstacle == arr.obstacle => Ok((wrap_signed(a.s - arr.s, perim), a.eta - arr.eta)),
                    _ => Err(BilliardError::NearGlancing),
                }
            };
            let (p1, m1, p2, m2) = (image(1.0)?, image(-1.0)?, image(2.0)?, image(-2.0)?);
            let d = |f: fn((f64, f64)) -> f64| (8.0 * (f(p1) - f(m1)) - (f(p2) - f(m2))) / (12.0 * h);
            jac[(0, col)] = d(|v| v.0);
            jac[(1, col)] = d(|v| v.1);
        }
        Ok(jac)
    }

    /// Closed-form Jacobian of `B+` (or `B-`) for disc obstacles, from the
    /// chord length generating function `L(s, s')` with `eta = -dL/ds` and
    /// `eta' = dL/ds'`.
    pub fn jacobian_analytic(&self, rho: BoundaryPhasePoint, branch: Branch) -> Result<Matrix2<f64>> {
        let st = self.step(rho, branch)?;
        let Some(arr) = st.arrival else {
            return Err(BilliardError::NoHit);
        };
        let from = self.config.get(rho.obstacle);
        let to = self.config.get(arr.obstacle);
        let legs = LegDerivatives::new(
            from.point(rho.s),
            from.tangent(rho.s),
            from.outward_normal(rho.s),
            from.curvature(rho.s),
            to.point(arr.s),
            to.tangent(arr.s),
            to.outward_normal(arr.s),
            to.curvature(arr.s),
        );
        Ok(legs.map_jacobian())
    }
}

/// Second derivatives of the chord length between two boundary points with
/// respect to their arclength parameters.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LegDerivatives {
    /// `dL/ds_a`, `dL/ds_b`
    pub grad: (f64, f64),
    pub l_aa: f64,
    pub l_bb: f64,
    pub l_ab: f64,
}

impl LegDerivatives {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        pa: Vec2,
        ta: Vec2,
        na: Vec2,
        ka: f64,
        pb: Vec2,
        tb: Vec2,
        nb: Vec2,
        kb: f64,
    ) -> Self {
        let d = pb - pa;
        let len = d.norm();
        let u = d * (1.0 / len);
        let ua = u.dot(ta);
        let ub = u.dot(tb);
        Self {
            grad: (-ua, ub),
            l_aa: (1.0 - ua * ua) / len + ka * u.dot(na),
            l_bb: (1.0 - ub * ub) / len - kb * u.dot(nb),
            l_ab: -(ta.dot(tb) - ua * ub) / len,
        }
    }

    pub fn map_jacobian(&self) -> Matrix2<f64> {
        let (a, b, c) = (self.l_aa, self.l_bb, self.l_ab);
        Matrix2::new(-a / c, -1.0 / c, c - b * a / c, -b / c)
    }
}

/// Maps `d` into `(-p/2, p/2]`.
pub(crate) fn wrap_signed(d: f64, p: f64) -> f64 {
    let r = d.rem_euclid(p);
    if r > 0.5 * p {
        r - p
    } else {
        r
    }
}
