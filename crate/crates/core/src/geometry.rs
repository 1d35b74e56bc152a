//! Disc obstacle configurations in the plane.
//!
//! An [`ObstacleConfig`] is an ordered list of `J >= 2` closed discs. The
//! billiard code only talks to obstacles through the [`BoundaryChart`] trait
//! (point, tangent, outward normal and curvature as functions of arclength),
//! so other strictly convex bodies can be added without touching the maps.
//!
//! # File format
//!
//! Obstacle files are CSV with the header `cx,cy,r` and one disc per row.
//! Blank lines and lines starting with `#` are ignored:
//!
//! ```text
//! # equilateral triangle, side 6
//! cx,cy,r
//! 0,0,1
//! 6,0,1
//! 3,5.196152422706632,1
//! ```

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid obstacle configuration: {0}")]
    InvalidConfig(String),
    #[error("obstacle file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Vec2 {
        self * (1.0 / self.norm())
    }

    /// Counterclockwise rotation by a quarter turn.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Arclength parametrization of a closed, counterclockwise oriented,
/// strictly convex boundary curve.
pub trait BoundaryChart {
    fn perimeter(&self) -> f64;
    fn point(&self, s: f64) -> Vec2;
    /// Unit tangent, counterclockwise.
    fn tangent(&self, s: f64) -> Vec2;
    fn outward_normal(&self, s: f64) -> Vec2;
    fn curvature(&self, s: f64) -> f64;
    /// Arclength of the boundary point closest to `p` (for points on the curve
    /// this inverts [`BoundaryChart::point`]).
    fn arclength_of(&self, p: Vec2) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscObstacle {
    pub center: Vec2,
    pub radius: f64,
}

impl DiscObstacle {
    pub fn new(cx: f64, cy: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeometryError::InvalidConfig(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        if !cx.is_finite() || !cy.is_finite() {
            return Err(GeometryError::InvalidConfig("non-finite center".into()));
        }
        Ok(Self {
            center: Vec2::new(cx, cy),
            radius,
        })
    }

    /// Angle of the boundary point at arclength `s`.
    pub fn angle(&self, s: f64) -> f64 {
        s / self.radius
    }

    pub fn contains(&self, p: Vec2) -> bool {
        (p - self.center).norm() < self.radius
    }
}

impl BoundaryChart for DiscObstacle {
    fn perimeter(&self) -> f64 {
        TAU * self.radius
    }

    fn point(&self, s: f64) -> Vec2 {
        self.center + self.outward_normal(s) * self.radius
    }

    fn tangent(&self, s: f64) -> Vec2 {
        self.outward_normal(s).perp()
    }

    fn outward_normal(&self, s: f64) -> Vec2 {
        let (sn, cs) = self.angle(s).sin_cos();
        Vec2::new(cs, sn)
    }

    fn curvature(&self, _s: f64) -> f64 {
        1.0 / self.radius
    }

    fn arclength_of(&self, p: Vec2) -> f64 {
        let d = p - self.center;
        d.y.atan2(d.x).rem_euclid(TAU) * self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleConfig {
    obstacles: Vec<DiscObstacle>,
}

impl ObstacleConfig {
    /// Builds a configuration. Only the count is validated here; use
    /// [`check_disjoint`] and [`check_no_eclipse`] for the geometric
    /// conditions.
    pub fn new(obstacles: Vec<DiscObstacle>) -> Result<Self> {
        if obstacles.len() < 2 {
            return Err(GeometryError::InvalidConfig(format!(
                "need at least 2 obstacles, got {}",
                obstacles.len()
            )));
        }
        Ok(Self { obstacles })
    }

    pub fn from_triples(triples: &[[f64; 3]]) -> Result<Self> {
        let obs = triples
            .iter()
            .map(|&[cx, cy, r]| DiscObstacle::new(cx, cy, r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(obs)
    }

    /// Two discs of radius `r` with centers `(0,0)` and `(distance,0)`.
    pub fn two_discs(distance: f64, r: f64) -> Result<Self> {
        Self::from_triples(&[[0.0, 0.0, r], [distance, 0.0, r]])
    }

    /// Three discs of radius `r` on the vertices of an equilateral triangle
    /// with the given side, centered on the origin.
    pub fn triangle(side: f64, r: f64) -> Result<Self> {
        let circ = side / 3f64.sqrt();
        let triples: Vec<[f64; 3]> = (0..3)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_2 + TAU * k as f64 / 3.0;
                [circ * a.cos(), circ * a.sin(), r]
            })
            .collect();
        Self::from_triples(&triples)
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }

    pub fn obstacles(&self) -> &[DiscObstacle] {
        &self.obstacles
    }

    pub fn get(&self, j: usize) -> &DiscObstacle {
        &self.obstacles[j]
    }

    /// Applies `p -> scale * R(angle) p + shift` to every disc.
    pub fn transformed(&self, angle: f64, scale: f64, shift: Vec2) -> Self {
        let obstacles = self
            .obstacles
            .iter()
            .map(|o| DiscObstacle {
                center: o.center.rotated(angle) * scale + shift,
                radius: o.radius * scale,
            })
            .collect();
        Self { obstacles }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut obstacles = Vec::new();
        let mut seen_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if !seen_header {
                if fields != ["cx", "cy", "r"] {
                    return Err(GeometryError::Parse {
                        line: line_no,
                        msg: format!("expected header `cx,cy,r`, found `{line}`"),
                    });
                }
                seen_header = true;
                continue;
            }
            if fields.len() != 3 {
                return Err(GeometryError::Parse {
                    line: line_no,
                    msg: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let mut vals = [0.0; 3];
            for (v, (f, name)) in vals.iter_mut().zip(fields.iter().zip(["cx", "cy", "r"])) {
                *v = f.parse().map_err(|_| GeometryError::Parse {
                    line: line_no,
                    msg: format!("field {name}: cannot parse `{f}` as a number"),
                })?;
            }
            let disc = DiscObstacle::new(vals[0], vals[1], vals[2]).map_err(|e| {
                GeometryError::Parse {
                    line: line_no,
                    msg: e.to_string(),
                }
            })?;
            obstacles.push(disc);
        }
        Self::new(obstacles)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cx,cy,r\n");
        for o in &self.obstacles {
            out.push_str(&format!("{},{},{}\n", o.center.x, o.center.y, o.radius));
        }
        out
    }
}

/// True iff the closed discs are pairwise disjoint.
pub fn check_disjoint(config: &ObstacleConfig) -> Result<bool> {
    if config.len() < 2 {
        return Err(GeometryError::InvalidConfig("need at least 2 obstacles".into()));
    }
    let obs = config.obstacles();
    for i in 0..obs.len() {
        for j in i + 1..obs.len() {
            let d = (obs[i].center - obs[j].center).norm();
            if d <= obs[i].radius + obs[j].radius {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Distance from `p` to the convex hull of two disjoint discs.
///
/// The hull is the union of the discs centered at `(1-t) c_a + t c_b` with
/// radius `(1-t) r_a + t r_b`, so the distance is the minimum over `t` of a
/// convex function whose stationary point has a closed form.
pub fn distance_to_hull(p: Vec2, a: &DiscObstacle, b: &DiscObstacle) -> f64 {
    let d = b.center - a.center;
    let len = d.norm();
    let e = d * (1.0 / len);
    let q = p - a.center;
    let along = q.dot(e);
    let perp = q.cross(e).abs();
    let slope = (b.radius - a.radius) / len;
    let profile = |tau: f64| ((along - tau).powi(2) + perp * perp).sqrt() - a.radius - slope * tau;
    let tau_star = (along + slope * perp / (1.0 - slope * slope).sqrt()).clamp(0.0, len);
    profile(tau_star).min(profile(0.0)).min(profile(len)).max(0.0)
}

/// Ikawa no-eclipse condition: no closed disc meets the convex hull of any
/// two others. Tangency counts as a violation.
pub fn check_no_eclipse(config: &ObstacleConfig) -> Result<bool> {
    if !check_disjoint(config)? {
        return Err(GeometryError::InvalidConfig(
            "obstacles are not pairwise disjoint".into(),
        ));
    }
    let obs = config.obstacles();
    let n = obs.len();
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                if i == j || i == k {
                    continue;
                }
                if distance_to_hull(obs[i].center, &obs[j], &obs[k]) <= obs[i].radius {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
