//! Periodic orbits from the closed broken-path length functional.

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use super::{Billiard, BilliardError, BoundaryPhasePoint, LegDerivatives, Result};
use crate::geometry::{check_no_eclipse, BoundaryChart, GeometryError, ObstacleConfig, Vec2};

#[derive(Debug, Clone, Copy)]
pub struct OrbitOptions {
    pub max_iterations: usize,
    /// Maximum allowed reflection-law residual at the minimizer.
    pub reflection_tol: f64,
    /// Angles per coordinate in the grid-search initialization.
    pub grid_points: usize,
    pub grid_sweeps: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            reflection_tol: 1e-10,
            grid_points: 64,
            grid_sweeps: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub word: Vec<usize>,
    pub points: Vec<BoundaryPhasePoint>,
    pub length: f64,
    /// Row-major 2x2 monodromy `DF^n` at `points[0]`.
    pub monodromy: [[f64; 2]; 2],
    /// Largest `|<u_in - u_out, T>|` over the bounces.
    pub reflection_residual: f64,
}

impl PeriodicOrbit {
    pub fn period(&self) -> usize {
        self.word.len()
    }

    pub fn monodromy_matrix(&self) -> Matrix2<f64> {
        let m = self.monodromy;
        Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }

    /// Eigenvalues `(mu, 1/mu)` of the monodromy, ordered by modulus, when
    /// they are real.
    pub fn multipliers(&self) -> Option<(f64, f64)> {
        let m = self.monodromy_matrix();
        let tr = m.trace();
        let det = m.determinant();
        let disc = tr * tr - 4.0 * det;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let (a, b) = ((tr + sq) / 2.0, (tr - sq) / 2.0);
        Some(if a.abs() >= b.abs() { (a, b) } else { (b, a) })
    }

    /// Expansion rate per bounce, `log|mu| / period`.
    pub fn lyapunov(&self) -> f64 {
        match self.multipliers() {
            Some((mu, _)) => mu.abs().ln() / self.period() as f64,
            None => 0.0,
        }
    }
}

pub(crate) fn validate_word(config: &ObstacleConfig, word: &[usize]) -> Result<()> {
    if word.len() < 2 {
        return Err(BilliardError::InvalidWord("length must be at least 2".into()));
    }
    if let Some(&bad) = word.iter().find(|&&w| w >= config.len()) {
        return Err(BilliardError::InvalidWord(format!(
            "index {bad} out of range for {} obstacles",
            config.len()
        )));
    }
    let m = word.len();
    if let Some(i) = (0..m).find(|&i| word[i] == word[(i + 1) % m]) {
        return Err(BilliardError::InvalidWord(format!(
            "adjacent repeat of obstacle {} at position {i}",
            word[i]
        )));
    }
    Ok(())
}

struct Polygon<'a> {
    config: &'a ObstacleConfig,
    word: &'a [usize],
}

impl Polygon<'_> {
    fn points(&self, s: &[f64]) -> Vec<Vec2> {
        self.word
            .iter()
            .zip(s)
            .map(|(&j, &sj)| self.config.get(j).point(sj))
            .collect()
    }

    fn length(&self, s: &[f64]) -> f64 {
        let p = self.points(s);
        let m = p.len();
        (0..m).map(|i| (p[(i + 1) % m] - p[i]).norm()).sum()
    }

    fn leg(&self, s: &[f64], i: usize) -> LegDerivatives {
        let m = self.word.len();
        let k = (i + 1) % m;
        let a = self.config.get(self.word[i]);
        let b = self.config.get(self.word[k]);
        LegDerivatives::new(
            a.point(s[i]),
            a.tangent(s[i]),
            a.outward_normal(s[i]),
            a.curvature(s[i]),
            b.point(s[k]),
            b.tangent(s[k]),
            b.outward_normal(s[k]),
            b.curvature(s[k]),
        )
    }

    fn gradient_hessian(&self, s: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let m = s.len();
        let mut g = DVector::zeros(m);
        let mut h = DMatrix::zeros(m, m);
        for i in 0..m {
            let k = (i + 1) % m;
            let leg = self.leg(s, i);
            g[i] += leg.grad.0;
            g[k] += leg.grad.1;
            h[(i, i)] += leg.l_aa;
            h[(k, k)] += leg.l_bb;
            h[(i, k)] += leg.l_ab;
            h[(k, i)] += leg.l_ab;
        }
        (g, h)
    }
}

/// Finds the periodic `B+` orbit with the given itinerary by minimizing the
/// closed broken-path length with damped Newton steps.
pub fn find_periodic_orbit(
    config: &ObstacleConfig,
    word: &[usize],
    opts: &OrbitOptions,
) -> Result<PeriodicOrbit> {
    validate_word(config, word)?;
    if !check_no_eclipse(config)? {
        return Err(GeometryError::InvalidConfig("no-eclipse condition fails".into()).into());
    }
    let poly = Polygon { config, word };
    let m = word.len();

    // initial guess: each vertex faces the midpoint of its neighbours' centers
    let mut s: Vec<f64> = (0..m)
        .map(|i| {
            let ob = config.get(word[i]);
            let prev = config.get(word[(i + m - 1) % m]).center;
            let next = config.get(word[(i + 1) % m]).center;
            let target = (prev + next) * 0.5 - ob.center;
            target.y.atan2(target.x) * ob.radius
        })
        .collect();
    for _ in 0..opts.grid_sweeps {
        for i in 0..m {
            let r = config.get(word[i]).radius;
            let center = s[i];
            let mut best = (poly.length(&s), center);
            for g in 0..opts.grid_points {
                let offset = std::f64::consts::PI * (g as f64 / opts.grid_points as f64 - 0.5);
                s[i] = center + offset * r;
                let len = poly.length(&s);
                if len < best.0 {
                    best = (len, s[i]);
                }
            }
            s[i] = best.1;
        }
    }

    let mut converged = false;
    let mut iterations = 0;
    for it in 0..opts.max_iterations {
        iterations = it + 1;
        let (g, h) = poly.gradient_hessian(&s);
        if g.amax() < 1e-14 {
            converged = true;
            break;
        }
        let dir = match h.clone().cholesky() {
            Some(ch) => -ch.solve(&g),
            None => -g.clone(),
        };
        let base = poly.length(&s);
        let slope = g.dot(&dir);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let trial: Vec<f64> = s.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
            let len = poly.length(&trial);
            if len <= base + 1e-4 * t * slope {
                s = trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // at rounding level the length no longer decreases; accept if the
            // gradient is already tiny, decided by the residual check below
            converged = true;
            break;
        }
        if t == 1.0 && dir.amax() < 1e-15 {
            converged = true;
            break;
        }
    }

    let billiard = Billiard::new(config);
    let pts = poly.points(&s);
    let mut points = Vec::with_capacity(m);
    let mut residual: f64 = 0.0;
    for i in 0..m {
        let ob = config.get(word[i]);
        let prev = pts[(i + m - 1) % m];
        let next = pts[(i + 1) % m];
        let u_in = (pts[i] - prev).normalized();
        let u_out = (next - pts[i]).normalized();
        let t = ob.tangent(s[i]);
        residual = residual.max((u_in - u_out).dot(t).abs());
        // the bounce must happen on the visible side
        let nrm = ob.outward_normal(s[i]);
        if u_out.dot(nrm) <= 0.0 || u_in.dot(nrm) >= 0.0 {
            residual = f64::INFINITY;
        }
        points.push(billiard.normalize(BoundaryPhasePoint::new(word[i], s[i], u_out.dot(t))));
    }
    if !converged || !(residual <= opts.reflection_tol) {
        return Err(BilliardError::NoConvergence { iterations, residual });
    }

    let mut mono = Matrix2::identity();
    for p in &points {
        mono = billiard.jacobian_analytic(*p, super::Branch::Plus)? * mono;
    }
    Ok(PeriodicOrbit {
        word: word.to_vec(),
        length: poly.length(&s),
        points,
        monodromy: [[mono[(0, 0)], mono[(0, 1)]], [mono[(1, 0)], mono[(1, 1)]]],
        reflection_residual: residual,
    })
}

/// Hyperbolicity rate `log|mu_max| / period` of the orbit with this word.
pub fn lyapunov_estimate(config: &ObstacleConfig, word: &[usize], opts: &OrbitOptions) -> Result<f64> {
    Ok(find_periodic_orbit(config, word, opts)?.lyapunov())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_disc_orbit() {
        let cfg = ObstacleConfig::two_discs(6.0, 1.0).unwrap();
        let orb = find_periodic_orbit(&cfg, &[0, 1], &OrbitOptions::default()).unwrap();
        assert!((orb.length - 8.0).abs() < 1e-10);
        let p0 = cfg.get(0).point(orb.points[0].s);
        let p1 = cfg.get(1).point(orb.points[1].s);
        assert!((p0 - Vec2::new(1.0, 0.0)).norm() < 1e-9);
        assert!((p1 - Vec2::new(5.0, 0.0)).norm() < 1e-9);
        let (mu, inv) = orb.multipliers().unwrap();
        assert!(mu > 1.0 && inv < 1.0 && inv > 0.0);
        // per-bounce multiplier 5 + sqrt(24), squared
        assert!((mu - (5.0 + 24f64.sqrt()).powi(2)).abs() < 1e-8 * mu);
        assert!((orb.monodromy_matrix().determinant() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn invalid_words() {
        let cfg = ObstacleConfig::triangle(6.0, 1.0).unwrap();
        let o = OrbitOptions::default();
        assert!(matches!(find_periodic_orbit(&cfg, &[0, 0, 1], &o), Err(BilliardError::InvalidWord(_))));
        assert!(matches!(find_periodic_orbit(&cfg, &[0, 1, 0], &o), Err(BilliardError::InvalidWord(_))));
        assert!(matches!(find_periodic_orbit(&cfg, &[0], &o), Err(BilliardError::InvalidWord(_))));
        assert!(matches!(find_periodic_orbit(&cfg, &[0, 5], &o), Err(BilliardError::InvalidWord(_))));
    }

    #[test]
    fn orbit_points_are_mapped_cyclically() {
        let cfg = ObstacleConfig::triangle(6.0, 1.0).unwrap();
        let orb = find_periodic_orbit(&cfg, &[0, 1, 2, 1], &OrbitOptions::default()).unwrap();
        let b = Billiard::new(&cfg);
        for i in 0..orb.points.len() {
            let next = b.forward(orb.points[i]).unwrap().unwrap();
            let want = orb.points[(i + 1) % orb.points.len()];
            assert_eq!(next.obstacle, want.obstacle);
            assert!(super::super::wrap_signed(next.s - want.s, cfg.get(want.obstacle).perimeter()).abs() < 1e-9);
            assert!((next.eta - want.eta).abs() < 1e-9);
        }
    }
}
