//! The contour representation of `e^{tA}(I - A)^{-k}U` for a dissipative
//! generator, its deformation below the real axis and the decay rate it
//! yields.
//!
//! ```bash
//! cargo run --release -p oslab --example contour_lemma
//! ```

use nalgebra::DVector;
use oslab::wave_decay::{
    contour_decay_rate, deformed_contour_check, random_dissipative, semigroup_contour, ContourOptions, DeformedOptions,
};
use oslab::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 6;
    let a = random_dissipative(n, 0.5, 1);
    let u = DVector::from_fn(n, |i, _| Complex64::new(1.0 / (1.0 + i as f64), 0.0));
    let ev = a.clone().schur().eigenvalues().ok_or("Schur form failed")?;
    let margin = -ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    println!("dimension {n}, spectral margin {margin:.4}");

    let opts = ContourOptions::default();
    println!("{:>5} {:>14} {:>8} {:>12}", "t", "|value|", "points", "deformed");
    for t in [0.0, 1.0, 2.0, 5.0] {
        let r = semigroup_contour(&a, 2, t, &u, &opts)?;
        let d = deformed_contour_check(&a, 2, t, &u, 0.5 * margin, &DeformedOptions::default())?;
        println!("{t:>5} {:>14.6e} {:>8} {:>12.2e}", r.value.norm(), r.points, d.max_difference);
    }
    let ts: Vec<f64> = (1..=20).map(f64::from).collect();
    let delta = 0.95 * margin;
    let rate = contour_decay_rate(&a, 2, &u, delta, &ts, &DeformedOptions::default())?;
    println!("decay rate {rate:.4} with delta = {delta:.4}");
    Ok(())
}
