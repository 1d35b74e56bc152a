//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use oslab::geometry::{DiscObstacle, ObstacleConfig, Vec2};
use oslab::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMat = DMatrix<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `e^A` by scaling and squaring with a degree-24 Taylor polynomial.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a * Complex64::new(0.5f64.powi(s), 0.0);
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `e^{tA} (I - A)^{-k} u` with the exponential from [`expm`] and the
/// inverse power from repeated LU solves.
pub fn semigroup_oracle(a: &CMat, k: u32, t: f64, u: &nalgebra::DVector<Complex64>) -> nalgebra::DVector<Complex64> {
    let n = a.nrows();
    let lu = (CMat::identity(n, n) - a).lu();
    let mut w = u.clone();
    for _ in 0..k {
        w = lu.solve(&w).expect("I - A invertible");
    }
    expm(&(a * Complex64::new(t, 0.0))) * w
}

/// Largest singular value from the full SVD.
pub fn svd_norm(m: &CMat) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Entry parameters `t` of the two intersections of `p + t d` with a circle,
/// from the quadratic formula; `None` if the ray's line misses the circle.
pub fn ray_circle(p: Vec2, d: Vec2, c: Vec2, r: f64) -> Option<(f64, f64)> {
    let q = Vec2::new(p.x - c.x, p.y - c.y);
    let a = d.x * d.x + d.y * d.y;
    let b = 2.0 * (q.x * d.x + q.y * d.y);
    let cc = q.x * q.x + q.y * q.y - r * r;
    let disc = b * b - 4.0 * a * cc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    Some(((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)))
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let s = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    let (ex, ey) = (a.x + s * dx - p.x, a.y + s * dy - p.y);
    (ex * ex + ey * ey).sqrt()
}

fn boundary_point(o: &DiscObstacle, theta: f64) -> Vec2 {
    Vec2::new(o.center.x + o.radius * theta.cos(), o.center.y + o.radius * theta.sin())
}

/// Smallest `dist(c_i, chord) - r_i` over `samples^2` chords joining boundary
/// points of `O_j` and `O_k`, minimized over all triples. Negative or zero
/// means some chord meets a third disc.
pub fn chord_margin(config: &ObstacleConfig, samples: usize) -> f64 {
    let obs = config.obstacles();
    let mut worst = f64::INFINITY;
    for (i, oi) in obs.iter().enumerate() {
        for (j, oj) in obs.iter().enumerate() {
            for (k, ok) in obs.iter().enumerate().skip(j + 1) {
                if i == j || i == k {
                    continue;
                }
                for a in 0..samples {
                    let pa = boundary_point(oj, std::f64::consts::TAU * a as f64 / samples as f64);
                    for b in 0..samples {
                        let pb = boundary_point(ok, std::f64::consts::TAU * b as f64 / samples as f64);
                        worst = worst.min(point_segment_distance(oi.center, pa, pb) - oi.radius);
                    }
                }
            }
        }
    }
    worst
}

/// Random pairwise-disjoint configuration of `j` discs.
pub fn random_disjoint(rng: &mut ChaCha8Rng, j: usize, spread: f64) -> ObstacleConfig {
    loop {
        let discs: Vec<[f64; 3]> = (0..j)
            .map(|_| {
                [
                    rng.random_range(-spread..spread),
                    rng.random_range(-spread..spread),
                    rng.random_range(0.5..1.5),
                ]
            })
            .collect();
        let ok = (0..j).all(|a| {
            (a + 1..j).all(|b| {
                let (p, q) = (discs[a], discs[b]);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() > p[2] + q[2] + 0.1
            })
        });
        if ok {
            return ObstacleConfig::from_triples(&discs).unwrap();
        }
    }
}

/// Random configuration satisfying the no-eclipse condition with margin,
/// certified by the chord oracle.
pub fn random_no_eclipse(rng: &mut ChaCha8Rng, j: usize) -> ObstacleConfig {
    loop {
        let c = random_disjoint(rng, j, 6.0);
        if chord_margin(&c, 60) > 0.2 {
            return c;
        }
    }
}

/// Closed broken-path length through boundary points at angles `theta` on
/// the discs of `word`.
pub fn polygon_length(config: &ObstacleConfig, word: &[usize], theta: &[f64]) -> f64 {
    let pts: Vec<Vec2> = word
        .iter()
        .zip(theta)
        .map(|(&j, &th)| boundary_point(config.get(j), th))
        .collect();
    (0..pts.len())
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
        })
        .sum()
}

/// Minimum closed path length by brute force over a `grid`-point angle
/// lattice per vertex, refined by cyclic golden-section line searches.
pub fn grid_search_orbit_length(config: &ObstacleConfig, word: &[usize], grid: usize) -> f64 {
    let m = word.len();
    let step = std::f64::consts::TAU / grid as f64;
    let mut best = (f64::INFINITY, vec![0.0; m]);
    let mut idx = vec![0usize; m];
    loop {
        let theta: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
        let len = polygon_length(config, word, &theta);
        if len < best.0 {
            best = (len, theta);
        }
        let mut p = 0;
        while p < m {
            idx[p] += 1;
            if idx[p] < grid {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
        if p == m {
            break;
        }
    }
    let mut theta = best.1;
    let mut width = 2.0 * step;
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        for v in 0..m {
            let (mut lo, mut hi) = (theta[v] - width, theta[v] + width);
            let f = |x: f64, th: &mut Vec<f64>| {
                th[v] = x;
                polygon_length(config, word, th)
            };
            for _ in 0..80 {
                let x1 = hi - gr * (hi - lo);
                let x2 = lo + gr * (hi - lo);
                let mut t1 = theta.clone();
                let mut t2 = theta.clone();
                if f(x1, &mut t1) < f(x2, &mut t2) {
                    hi = x2;
                } else {
                    lo = x1;
                }
            }
            theta[v] = 0.5 * (lo + hi);
        }
        width *= 0.8;
    }
    polygon_length(config, word, &theta)
}
