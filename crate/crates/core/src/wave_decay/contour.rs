//! `e^{tA}(I - A)^{-k} U` as a contour integral of the resolvent.
//!
//! For a dissipative matrix `A` and `k >= 2`,
//!
//! ```text
//! e^{tA}(I - A)^{-k} U = -1/(2 pi) ∫_{Im λ = 1/2} e^{-itλ}(1 + iλ)^{-k}(A + iλ)^{-1} U dλ.
//! ```
//!
//! Expanding `(A + iλ)^{-1}` around the pole `λ = i` of `(1 + iλ)^{-1}`,
//!
//! ```text
//! (A + iλ)^{-1} = Σ_{j<m} (I - A)^j (1 + iλ)^{-(j+1)} + (1 + iλ)^{-m} (A + iλ)^{-1} (I - A)^m,
//! ```
//!
//! and the polynomial terms integrate to zero because their only pole lies
//! above the contour. The integrand actually used is therefore
//! `e^{-itλ}(1 + iλ)^{-(k+m)}(A + iλ)^{-1}(I - A)^m U`, which has the same
//! integral and a much lighter tail.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Result, WaveError};
use crate::linalg::{self, CMat, CVec};
use crate::stats::linear_fit;

#[derive(Debug, Clone, Copy)]
pub struct ContourOptions {
    /// Absolute tolerance relative to `||U||`.
    pub tol: f64,
    /// Number of resolvent expansion terms moved out of the integrand.
    pub accel_order: u32,
    /// Largest admissible Hermitian-part eigenvalue.
    pub dissipative_tol: f64,
    pub max_points: usize,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            accel_order: 4,
            dissipative_tol: 1e-12,
            max_points: 1 << 22,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContourResult {
    pub value: CVec,
    /// Truncation `|Re λ| <= lambda_max`.
    pub lambda_max: f64,
    pub points: usize,
    /// Difference between the last two quadrature refinements.
    pub quadrature_estimate: f64,
}

struct Integrand<'a> {
    a: &'a CMat,
    w: CVec,
    t: f64,
    power: i32,
}

impl Integrand<'_> {
    fn eval(&self, lambda: Complex64) -> Result<CVec> {
        let i = Complex64::i();
        let n = self.a.nrows();
        let shifted = self.a + CMat::identity(n, n) * (i * lambda);
        let x = linalg::solve(&shifted, &self.w)?;
        let scalar = (-i * self.t * lambda).exp() * (Complex64::new(1.0, 0.0) + i * lambda).powi(-self.power);
        Ok(x * scalar)
    }
}

fn validate(a: &CMat, k: u32, t: f64, u: &CVec, opts: &ContourOptions) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() != u.len() {
        return Err(WaveError::DimensionMismatch(format!(
            "A is {}x{}, U has length {}",
            a.nrows(),
            a.ncols(),
            u.len()
        )));
    }
    if k < 2 {
        return Err(WaveError::InvalidParameter("k must be at least 2".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(WaveError::InvalidParameter("t must be finite and nonnegative".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(WaveError::InvalidParameter("tolerance must be positive".into()));
    }
    let max_eig = linalg::hermitian_part_max(a);
    if max_eig > opts.dissipative_tol {
        return Err(WaveError::NotDissipative { max_eig });
    }
    Ok(())
}

fn integrand<'a>(a: &'a CMat, k: u32, t: f64, u: &CVec, m: u32) -> Integrand<'a> {
    let n = a.nrows();
    let i_minus_a = CMat::identity(n, n) - a;
    let mut w = u.clone();
    for _ in 0..m {
        w = &i_minus_a * w;
    }
    Integrand {
        a,
        w,
        t,
        power: (k + m) as i32,
    }
}

/// Truncation point from `∫_{|x|>Λ} |integrand| <= 4 ||W|| e^{t/2} Λ^{1-p} / (p-1)`,
/// which uses `||(A + iλ)^{-1}|| <= 2` and `|1 + iλ| >= |Re λ|` on the line.
fn truncation(w_norm: f64, t: f64, p: u32, target: f64) -> Result<f64> {
    let p = p as f64;
    let lambda = (4.0 * w_norm * (0.5 * t).exp() / ((p - 1.0) * target)).powf(1.0 / (p - 1.0));
    if !lambda.is_finite() || lambda > 1e8 {
        return Err(WaveError::TailTooLarge { lambda_max: lambda });
    }
    Ok(lambda.max(4.0))
}

/// Evaluates `e^{tA}(I - A)^{-k} U` by adaptive trapezoidal quadrature on
/// `Im λ = 1/2`, `|Re λ| <= Λ`.
pub fn semigroup_contour(a: &CMat, k: u32, t: f64, u: &CVec, opts: &ContourOptions) -> Result<ContourResult> {
    validate(a, k, t, u, opts)?;
    let u_norm = u.norm();
    if u_norm == 0.0 {
        return Ok(ContourResult {
            value: u.clone(),
            lambda_max: 0.0,
            points: 0,
            quadrature_estimate: 0.0,
        });
    }
    let f = integrand(a, k, t, u, opts.accel_order);
    let target = opts.tol * u_norm;
    let lambda_max = truncation(f.w.norm(), t, k + opts.accel_order, 0.1 * target)?;
    let at = |x: f64| Complex64::new(x, 0.5);

    // returns the vector sum and the sum of norms
    let eval_many = |xs: Vec<f64>| -> Result<(CVec, f64)> {
        let vals = xs.into_par_iter().map(|x| f.eval(at(x))).collect::<Result<Vec<_>>>()?;
        let mut acc = CVec::zeros(u.len());
        let mut l1 = 0.0;
        for v in vals {
            l1 += v.norm();
            acc += v;
        }
        Ok((acc, l1))
    };

    let mut intervals = 64usize;
    let mut h = 2.0 * lambda_max / intervals as f64;
    let (f_lo, f_hi) = (f.eval(at(-lambda_max))?, f.eval(at(lambda_max))?);
    let interior: Vec<f64> = (1..intervals).map(|j| -lambda_max + j as f64 * h).collect();
    let (inner, inner_l1) = eval_many(interior)?;
    let mut sum = (&f_lo + &f_hi) * Complex64::new(0.5, 0.0) + inner;
    let mut l1 = 0.5 * (f_lo.norm() + f_hi.norm()) + inner_l1;
    let scale = Complex64::new(-1.0 / TAU, 0.0);
    let mut estimate = &sum * (scale * h);
    let mut refinements = 0;
    loop {
        let mids: Vec<f64> = (0..intervals).map(|j| -lambda_max + (j as f64 + 0.5) * h).collect();
        let (mid_sum, mid_l1) = eval_many(mids)?;
        sum += mid_sum;
        l1 += mid_l1;
        intervals *= 2;
        h *= 0.5;
        let next = &sum * (scale * h);
        let change = (&next - &estimate).norm();
        estimate = next;
        refinements += 1;
        if refinements >= 2 && change <= (0.1 * target).max(rounding_floor(l1 * h)) {
            return Ok(ContourResult {
                value: estimate,
                lambda_max,
                points: intervals + 1,
                quadrature_estimate: change,
            });
        }
        if intervals + 1 > opts.max_points {
            return Err(WaveError::InvalidParameter(format!(
                "quadrature did not settle within {} points (last change {change:e})",
                opts.max_points
            )));
        }
    }
}

/// Smallest change the quadrature can resolve when the integrand has
/// `L^1` norm `l1`: cancellation in `e^{-itλ}` leaves rounding noise of
/// this size.
fn rounding_floor(l1: f64) -> f64 {
    100.0 * f64::EPSILON * l1 / TAU
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[derive(Debug, Clone, Copy)]
pub struct DeformedOptions {
    pub contour: ContourOptions,
    /// Radius of the arc around 0; defaults to `delta / 4`.
    pub eps: Option<f64>,
    /// Poles closer than this to the path are rejected.
    pub pole_tol: f64,
    pub gauss_points: usize,
}

impl Default for DeformedOptions {
    fn default() -> Self {
        Self {
            contour: ContourOptions::default(),
            eps: None,
            pole_tol: 1e-6,
            gauss_points: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeformedCheck {
    /// Integral over the deformed path.
    pub value: CVec,
    /// Integral over the straight line `Im λ = 1/2`.
    pub reference: CVec,
    /// Largest componentwise `|value - reference|`.
    pub max_difference: f64,
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Line(Complex64, Complex64),
    /// Circle arc `radius e^{iθ}`, `θ` from `from` to `to`.
    Arc { radius: f64, from: f64, to: f64 },
}

impl Segment {
    fn length(&self) -> f64 {
        match *self {
            Segment::Line(a, b) => (b - a).norm(),
            Segment::Arc { radius, from, to } => radius * (to - from).abs(),
        }
    }

    /// Point and derivative at parameter `s in [0, 1]`.
    fn at(&self, s: f64) -> (Complex64, Complex64) {
        match *self {
            Segment::Line(a, b) => (a + (b - a) * s, b - a),
            Segment::Arc { radius, from, to } => {
                let th = from + (to - from) * s;
                let z = Complex64::from_polar(radius, th);
                (z, Complex64::i() * z * (to - from))
            }
        }
    }

    fn distance(&self, p: Complex64) -> f64 {
        match *self {
            Segment::Line(a, b) => {
                let d = b - a;
                let s = (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                (a + d * s - p).norm()
            }
            Segment::Arc { radius, from, to } => {
                let th = p.arg();
                let (lo, hi) = if from < to { (from, to) } else { (to, from) };
                let on_arc = [th, th + TAU, th - TAU].iter().any(|&a| a >= lo && a <= hi);
                if on_arc {
                    (p.norm() - radius).abs()
                } else {
                    let e0 = Complex64::from_polar(radius, from);
                    let e1 = Complex64::from_polar(radius, to);
                    (p - e0).norm().min((p - e1).norm())
                }
            }
        }
    }
}

fn deformed_path(lambda_max: f64, delta: f64, eps: f64) -> Vec<Segment> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    vec![
        Segment::Line(c(-lambda_max, 0.5), c(-lambda_max, -delta)),
        Segment::Line(c(-lambda_max, -delta), c(-delta, -delta)),
        Segment::Line(c(-delta, -delta), Complex64::from_polar(eps, -3.0 * FRAC_PI_4)),
        Segment::Arc {
            radius: eps,
            from: 5.0 * FRAC_PI_4,
            to: -FRAC_PI_4,
        },
        Segment::Line(Complex64::from_polar(eps, -FRAC_PI_4), c(delta, -delta)),
        Segment::Line(c(delta, -delta), c(lambda_max, -delta)),
        Segment::Line(c(lambda_max, -delta), c(lambda_max, 0.5)),
    ]
}

/// Whether `p` lies between the line `Im λ = 1/2` and the deformed path.
fn swept(p: Complex64, lambda_max: f64, delta: f64, eps: f64) -> bool {
    if !(p.im > -delta && p.im < 0.5 && p.re.abs() < lambda_max) {
        return false;
    }
    if p.norm() <= eps {
        return false;
    }
    // wedge under the two radial segments
    let below_wedge = p.im < 0.0 && p.re.abs() <= -p.im;
    !below_wedge
}

/// Integrates the same integrand along a path pushed down to `Im λ = -delta`
/// (vertical connectors at `Re λ = ±Λ`, radial segments into a small arc
/// passing above 0) and compares with the straight-line value.
pub fn deformed_contour_check(
    a: &CMat,
    k: u32,
    t: f64,
    u: &CVec,
    delta: f64,
    opts: &DeformedOptions,
) -> Result<DeformedCheck> {
    let reference = semigroup_contour(a, k, t, u, &opts.contour)?;
    let value = deformed_value(a, k, t, u, delta, opts, reference.lambda_max.max(4.0))?;
    let max_difference = (&value - &reference.value).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(DeformedCheck {
        value,
        reference: reference.value,
        max_difference,
    })
}

fn deformed_value(
    a: &CMat,
    k: u32,
    t: f64,
    u: &CVec,
    delta: f64,
    opts: &DeformedOptions,
    lambda_max: f64,
) -> Result<CVec> {
    if !(delta > 0.0 && delta < lambda_max) {
        return Err(WaveError::InvalidParameter("delta must lie in (0, Λ)".into()));
    }
    let eps = opts.eps.unwrap_or(0.25 * delta);
    if !(eps > 0.0 && eps < delta * std::f64::consts::SQRT_2) {
        return Err(WaveError::InvalidParameter("arc radius must lie in (0, delta sqrt 2)".into()));
    }
    let path = deformed_path(lambda_max, delta, eps);
    for mu in linalg::eigenvalues(a)? {
        let pole = Complex64::i() * mu;
        let near = path.iter().any(|s| s.distance(pole) < opts.pole_tol);
        if near || swept(pole, lambda_max, delta, eps) {
            return Err(WaveError::PoleOnPath { pole });
        }
    }
    let u_norm = u.norm();
    if u_norm == 0.0 {
        return Ok(u.clone());
    }
    let f = integrand(a, k, t, u, opts.contour.accel_order);
    let rule = gauss_legendre(opts.gauss_points.max(2));
    let target = 0.1 * opts.contour.tol * u_norm;
    // initial panel length per segment: the arc and the radial pieces live on
    // scale eps, the rest on the oscillation scale of e^{-itλ}
    let long_panel = 1.0f64.min(PI / t.max(1e-300));
    let scales: Vec<f64> = (0..path.len())
        .map(|j| if (2..=4).contains(&j) { eps.min(long_panel) } else { long_panel })
        .collect();
    let integrate = |refine: f64| -> Result<(CVec, f64)> {
        let mut nodes = Vec::new();
        for (seg, &scale) in path.iter().zip(&scales) {
            let panels = (seg.length() / (scale * refine)).ceil().max(1.0) as usize;
            for p in 0..panels {
                for &(x, w) in &rule {
                    let s = (p as f64 + 0.5 * (x + 1.0)) / panels as f64;
                    let (z, dz) = seg.at(s);
                    nodes.push((z, dz * (0.5 * w / panels as f64)));
                }
            }
        }
        let vals = nodes
            .into_par_iter()
            .map(|(z, wz)| f.eval(z).map(|v| v * wz))
            .collect::<Result<Vec<_>>>()?;
        let mut acc = CVec::zeros(u.len());
        let mut l1 = 0.0;
        for v in vals {
            l1 += v.norm();
            acc += v;
        }
        Ok((acc * Complex64::new(-1.0 / TAU, 0.0), l1))
    };
    let mut refine = 1.0;
    let (mut value, _) = integrate(refine)?;
    loop {
        refine *= 0.5;
        let (next, l1) = integrate(refine)?;
        let change = (&next - &value).norm();
        value = next;
        if change <= target.max(rounding_floor(l1)) {
            return Ok(value);
        }
        if refine < 1e-4 {
            return Err(WaveError::InvalidParameter(format!(
                "deformed quadrature did not settle (last change {change:e})"
            )));
        }
    }
}

/// Exponential decay rate of `||e^{tA}(I - A)^{-k} U||` read off the
/// deformed-path values at the given times.
pub fn contour_decay_rate(a: &CMat, k: u32, u: &CVec, delta: f64, ts: &[f64], opts: &DeformedOptions) -> Result<f64> {
    let mut pts = Vec::with_capacity(ts.len());
    for &t in ts {
        validate(a, k, t, u, &opts.contour)?;
        let m = opts.contour.accel_order;
        let w_norm = integrand(a, k, t, u, m).w.norm();
        let lambda_max = truncation(w_norm, t, k + m, 0.1 * opts.contour.tol * u.norm())?;
        let value = deformed_value(a, k, t, u, delta, opts, lambda_max)?;
        pts.push((t, value.norm().ln()));
    }
    linear_fit(&pts)
        .map(|f| -f.slope)
        .ok_or_else(|| WaveError::InvalidParameter("need at least two distinct times".into()))
}

/// Random generator `2(S - S*) - BB* - margin I` with `S`, `B` having
/// entries uniform in the unit square centered at 0. Its Hermitian part is
/// at most `-margin`.
pub fn random_dissipative(n: usize, margin: f64, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    let b = CMat::from_fn(n, n, |_, _| draw());
    let s = CMat::from_fn(n, n, |_, _| draw());
    (&s - s.adjoint()) * Complex64::new(2.0, 0.0) - &b * b.adjoint() - linalg::identity(n) * Complex64::new(margin, 0.0)
}
