//! Box covers of the trapped set `T = T+ ∩ T-`.
//!
//! Boxes are quadrisected level by level. A child box is kept when one of its
//! sample cells has both its forward image and its backward image (each
//! linearized around the sampled center) meeting the current candidate
//! collection. This is the usual subdivision scheme for maximal invariant
//! sets; it keeps the cover nonempty even when the map expands faster than
//! the sample grid can resolve individual survivors.

use std::collections::HashSet;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Billiard, BilliardError, BoundaryPhasePoint, Branch, Result};
use crate::geometry::{BoundaryChart, ObstacleConfig};

/// Sample resolution per side of the whole phase space at coarse depths.
const MIN_SAMPLES_PER_SIDE: usize = 256;

#[derive(Debug, Clone, Copy)]
pub struct CoverOptions {
    /// Sample cells per box side at fine depths.
    pub samples: usize,
    /// Factor applied to the linearized image of a sample cell.
    pub inflate: f64,
    /// Maximum selection passes per level.
    pub sweeps: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self {
            samples: 8,
            inflate: 1.25,
            sweeps: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoverBox {
    pub obstacle: usize,
    pub s_index: u64,
    pub eta_index: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrappedSetCover {
    pub depth: u32,
    /// Sorted by `(obstacle, s_index, eta_index)`.
    pub boxes: Vec<CoverBox>,
    /// Box side lengths `(ds, deta)` per obstacle.
    pub box_size: Vec<(f64, f64)>,
    pub total_area: f64,
}

impl TrappedSetCover {
    pub fn box_count(&self) -> usize {
        self.boxes.len()
    }

    /// `[s0, s1) x [eta0, eta1)` of a box.
    pub fn rect(&self, b: &CoverBox) -> ([f64; 2], [f64; 2]) {
        let (ds, de) = self.box_size[b.obstacle];
        let s0 = b.s_index as f64 * ds;
        let e0 = -1.0 + b.eta_index as f64 * de;
        ([s0, s0 + ds], [e0, e0 + de])
    }

    pub fn center(&self, b: &CoverBox) -> BoundaryPhasePoint {
        let ([s0, s1], [e0, e1]) = self.rect(b);
        BoundaryPhasePoint::new(b.obstacle, 0.5 * (s0 + s1), 0.5 * (e0 + e1))
    }

    /// Boxes grouped by obstacle.
    pub fn per_obstacle(&self) -> Vec<Vec<([f64; 2], [f64; 2])>> {
        let mut out = vec![Vec::new(); self.box_size.len()];
        for b in &self.boxes {
            out[b.obstacle].push(self.rect(b));
        }
        out
    }

    fn build(config: &ObstacleConfig, depth: u32, mut boxes: Vec<CoverBox>) -> Self {
        boxes.sort_unstable();
        let n = (1u64 << depth) as f64;
        let box_size: Vec<(f64, f64)> = config
            .obstacles()
            .iter()
            .map(|o| (o.perimeter() / n, 2.0 / n))
            .collect();
        let total_area = boxes
            .iter()
            .map(|b| box_size[b.obstacle].0 * box_size[b.obstacle].1)
            .sum();
        Self {
            depth,
            boxes,
            box_size,
            total_area,
        }
    }
}

/// Covers at every depth `0..=depth`.
pub fn trapped_set_covers(
    config: &ObstacleConfig,
    depth: u32,
    opts: &CoverOptions,
) -> Vec<TrappedSetCover> {
    let billiard = Billiard::new(config);
    let level0: Vec<CoverBox> = (0..config.len())
        .map(|j| CoverBox {
            obstacle: j,
            s_index: 0,
            eta_index: 0,
        })
        .collect();
    let mut covers = vec![TrappedSetCover::build(config, 0, level0)];
    for level in 1..=depth {
        let prev = covers.last().expect("level 0 present");
        let mut kept: Vec<CoverBox> = prev
            .boxes
            .iter()
            .flat_map(|b| {
                let (a, e) = (2 * b.s_index, 2 * b.eta_index);
                [(a, e), (a + 1, e), (a, e + 1), (a + 1, e + 1)].map(|(s_index, eta_index)| CoverBox {
                    obstacle: b.obstacle,
                    s_index,
                    eta_index,
                })
            })
            .collect();
        for _ in 0..opts.sweeps.max(1) {
            let current = TrappedSetCover::build(config, level, kept.clone());
            let lookup: HashSet<CoverBox> = kept.iter().copied().collect();
            let next: Vec<CoverBox> = kept
                .par_iter()
                .filter(|b| box_survives(&billiard, &current, &lookup, b, opts))
                .copied()
                .collect();
            let done = next.len() == kept.len();
            kept = next;
            if done {
                break;
            }
        }
        covers.push(TrappedSetCover::build(config, level, kept));
    }
    covers
}

/// Cover at the given depth.
pub fn trapped_set_cover(config: &ObstacleConfig, depth: u32, opts: &CoverOptions) -> TrappedSetCover {
    trapped_set_covers(config, depth, opts)
        .pop()
        .expect("at least one level")
}

fn box_survives(
    billiard: &Billiard<'_>,
    cover: &TrappedSetCover,
    lookup: &HashSet<CoverBox>,
    b: &CoverBox,
    opts: &CoverOptions,
) -> bool {
    let ([s0, _], [e0, _]) = cover.rect(b);
    let (ds, de) = cover.box_size[b.obstacle];
    // coarse boxes get enough samples to resolve thin hitting windows
    let g = opts.samples.max(1).max(MIN_SAMPLES_PER_SIDE >> cover.depth.min(16));
    let (hs, he) = (0.5 * ds / g as f64, 0.5 * de / g as f64);
    (0..g * g).any(|k| {
        let rho = BoundaryPhasePoint::new(
            b.obstacle,
            s0 + (2 * (k % g) + 1) as f64 * hs,
            e0 + (2 * (k / g) + 1) as f64 * he,
        );
        let fwd = linearized_image(billiard, rho, hs, he, opts.inflate);
        let Some(fwd) = fwd else { return false };
        if !meets(cover, lookup, fwd) {
            return false;
        }
        let back = linearized_image(billiard, rho.reversed(), hs, he, opts.inflate)
            .map(|(p, ws, we)| (p.reversed(), ws, we));
        back.is_some_and(|bk| meets(cover, lookup, bk))
    })
}

/// Image center and half-widths of the image of a sample cell.
fn linearized_image(
    billiard: &Billiard<'_>,
    rho: BoundaryPhasePoint,
    hs: f64,
    he: f64,
    inflate: f64,
) -> Option<(BoundaryPhasePoint, f64, f64)> {
    let arr = billiard.forward(rho).ok()??;
    let j: Matrix2<f64> = billiard.jacobian_analytic(rho, Branch::Plus).ok()?;
    let ws = inflate * (j[(0, 0)].abs() * hs + j[(0, 1)].abs() * he);
    let we = inflate * (j[(1, 0)].abs() * hs + j[(1, 1)].abs() * he);
    Some((arr, ws, we))
}

fn meets(cover: &TrappedSetCover, lookup: &HashSet<CoverBox>, (p, ws, we): (BoundaryPhasePoint, f64, f64)) -> bool {
    let n = 1u64 << cover.depth;
    let (ds, de) = cover.box_size[p.obstacle];
    let e_lo = (((p.eta - we + 1.0) / de).floor().max(0.0)) as u64;
    let e_hi = (((p.eta + we + 1.0) / de).floor() as i64).clamp(0, n as i64 - 1) as u64;
    let s_lo = ((p.s - ws) / ds).floor() as i64;
    let s_hi = ((p.s + ws) / ds).floor() as i64;
    let span = (s_hi - s_lo + 1).min(n as i64);
    for k in 0..span {
        let s_index = (s_lo + k).rem_euclid(n as i64) as u64;
        for eta_index in e_lo..=e_hi.max(e_lo) {
            if eta_index >= n {
                break;
            }
            if lookup.contains(&CoverBox {
                obstacle: p.obstacle,
                s_index,
                eta_index,
            }) {
                return true;
            }
        }
    }
    false
}

/// Box-counting dimension: least-squares slope of `log(count)` against
/// `log(1/scale)` over the covers with depth in `min_depth..`.
pub fn cover_dimension(covers: &[TrappedSetCover], min_depth: u32) -> Option<f64> {
    let pts: Vec<(f64, f64)> = covers
        .iter()
        .filter(|c| c.depth >= min_depth && c.box_count() > 0)
        .map(|c| (c.depth as f64 * std::f64::consts::LN_2, (c.box_count() as f64).ln()))
        .collect();
    crate::stats::linear_fit(&pts).map(|f| f.slope)
}

/// Mean expansion rate per bounce along orbits started at the box centers of
/// a cover, followed for at most `steps` bounces.
pub fn lyapunov_from_cover(config: &ObstacleConfig, cover: &TrappedSetCover, steps: usize) -> Result<f64> {
    let billiard = Billiard::new(config);
    let (sum_log, sum_steps) = cover
        .boxes
        .iter()
        .filter_map(|b| {
            let mut rho = cover.center(b);
            let mut prod = Matrix2::identity();
            let mut n = 0usize;
            while n < steps {
                let Ok(Some(next)) = billiard.forward(rho) else { break };
                let Ok(j) = billiard.jacobian_analytic(rho, Branch::Plus) else { break };
                prod = j * prod;
                rho = next;
                n += 1;
            }
            (n > 0).then(|| (prod.singular_values().max().ln(), n as f64))
        })
        .fold((0.0, 0.0), |acc, (l, n)| (acc.0 + l, acc.1 + n));
    if sum_steps == 0.0 {
        return Err(BilliardError::NoSurvivors);
    }
    Ok(sum_log / sum_steps)
}
