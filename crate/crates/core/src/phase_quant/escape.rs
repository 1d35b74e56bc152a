use num_complex::Complex64;

use super::{check_dims, quantize_weyl, PhaseError, Result, SymbolGrid, TorusOperator};
use crate::linalg::{self, CMat};

/// `M Op(exp(i z t / h))`.
pub fn apply_damping(m: &TorusOperator, z: Complex64, t: &SymbolGrid) -> Result<TorusOperator> {
    if t.dim() != m.dim() {
        return Err(PhaseError::DimensionMismatch(format!("operator {} vs symbol {}", m.dim(), t.dim())));
    }
    if !t.is_real(0.0) || t.values().iter().any(|v| !(v.re > 0.0)) {
        return Err(PhaseError::Numeric("return time must be real and positive".into()));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Ok(m.clone());
    }
    let h = m.h();
    let first = t.values()[0];
    if t.values().iter().all(|&v| v == first) {
        // Op of a constant is that constant times the identity
        let c = (Complex64::i() * z * first / h).exp();
        return Ok(TorusOperator::new(m.entries() * c));
    }
    let factor = t.map(|tv| (Complex64::i() * z * tv / h).exp());
    let op = quantize_weyl(&factor, m.dim())?;
    m.compose(&op)
}

/// Escape function `g = T log(1/h) g0`.
#[derive(Debug, Clone)]
pub struct EscapeWeight {
    g0: SymbolGrid,
    strength: f64,
}

impl EscapeWeight {
    /// `g0` must be real and nonnegative, `strength` positive.
    pub fn new(g0: SymbolGrid, strength: f64) -> Result<Self> {
        if !g0.is_real(0.0) || g0.values().iter().any(|v| !(v.re >= 0.0) || !v.re.is_finite()) {
            return Err(PhaseError::Numeric("g0 must be real, finite and nonnegative".into()));
        }
        if !(strength > 0.0 && strength.is_finite()) {
            return Err(PhaseError::Numeric("strength must be positive".into()));
        }
        Ok(Self { g0, strength })
    }

    pub fn g0(&self) -> &SymbolGrid {
        &self.g0
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    /// `C0 = max g0`.
    pub fn c0(&self) -> f64 {
        self.g0.sup_abs()
    }

    /// `h^{-T C0}`.
    pub fn weight_bound(&self, h: f64) -> f64 {
        h.powf(-self.strength * self.c0())
    }
}

#[derive(Debug, Clone)]
pub struct ConjugatedOperator {
    /// `D^{-1} M D` with `D = exp(Op(g))`.
    pub op: TorusOperator,
    pub norm_d: f64,
    pub norm_d_inv: f64,
    /// `h^{-T C0}`.
    pub bound: f64,
}

/// Conjugates `m` by `exp(Op(g))`, computed from the Hermitian
/// eigendecomposition of `Op(g)`.
pub fn conjugate_escape(m: &TorusOperator, w: &EscapeWeight) -> Result<ConjugatedOperator> {
    let n = m.dim();
    if w.g0.dim() != n {
        return Err(PhaseError::DimensionMismatch(format!("operator {} vs weight {}", n, w.g0.dim())));
    }
    let h = m.h();
    let bound = w.weight_bound(h);
    if w.c0() == 0.0 {
        return Ok(ConjugatedOperator {
            op: m.clone(),
            norm_d: 1.0,
            norm_d_inv: 1.0,
            bound,
        });
    }
    let scale = w.strength * (1.0 / h).ln();
    let g = quantize_weyl(&w.g0.scale(Complex64::new(scale, 0.0)), n)?;
    let g_herm = (g.entries() + g.entries().adjoint()) * Complex64::new(0.5, 0.0);
    let eig = g_herm.symmetric_eigen();
    let v = &eig.eigenvectors;
    let lam = &eig.eigenvalues;
    let with_diag = |sign: f64| {
        let mut vd = v.clone();
        for (j, mut col) in vd.column_iter_mut().enumerate() {
            col *= Complex64::new((sign * lam[j]).exp(), 0.0);
        }
        vd * v.adjoint()
    };
    let d = with_diag(1.0);
    let d_inv = with_diag(-1.0);
    let lmax = lam.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lmin = lam.iter().copied().fold(f64::INFINITY, f64::min);
    let out = &d_inv * m.entries() * &d;
    if !linalg::is_finite(&out) {
        return Err(PhaseError::Numeric("conjugated operator overflowed".into()));
    }
    Ok(ConjugatedOperator {
        op: TorusOperator::new(out),
        norm_d: lmax.exp(),
        norm_d_inv: (-lmin).exp(),
        bound,
    })
}

/// Sampled check of the escape-function inequalities
/// `g0 o F - g0 >= 0` on `W3` and `g0 o F - g0 >= 1` on `W3 \ W2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EscapeCheck {
    pub sampled: usize,
    pub nonneg_violations: usize,
    pub strict_violations: usize,
}

impl EscapeCheck {
    pub fn is_valid(&self) -> bool {
        self.nonneg_violations == 0 && self.strict_violations == 0
    }
}

/// Samples the unit square on a `samples x samples` midpoint grid.
/// Points where `map` is undefined are skipped.
pub fn validate_escape_function(
    g0: impl Fn(f64, f64) -> f64,
    map: impl Fn(f64, f64) -> Option<(f64, f64)>,
    in_w2: impl Fn(f64, f64) -> bool,
    in_w3: impl Fn(f64, f64) -> bool,
    samples: usize,
) -> EscapeCheck {
    let mut check = EscapeCheck::default();
    for i in 0..samples {
        for j in 0..samples {
            let x = (i as f64 + 0.5) / samples as f64;
            let xi = (j as f64 + 0.5) / samples as f64;
            if !in_w3(x, xi) {
                continue;
            }
            let Some((fx, fxi)) = map(x, xi) else { continue };
            check.sampled += 1;
            let diff = g0(fx, fxi) - g0(x, xi);
            if diff < 0.0 {
                check.nonneg_violations += 1;
            }
            if !in_w2(x, xi) && diff < 1.0 {
                check.strict_violations += 1;
            }
        }
    }
    check
}

/// `||U^{-1} Op(a) U - Op(a o F)||`.
pub fn egorov_defect(u: &TorusOperator, a: &SymbolGrid, af: &SymbolGrid) -> Result<f64> {
    let n = u.dim();
    let op_a = quantize_weyl(a, n)?;
    let op_af = quantize_weyl(af, n)?;
    check_dims(u, &op_a)?;
    let u_inv = linalg::inverse(u.entries())?;
    let diff: CMat = &u_inv * op_a.entries() * u.entries() - op_af.entries();
    Ok(linalg::operator_norm(&diff))
}
