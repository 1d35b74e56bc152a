//! Resolvent norms `||(I - M(z))^{-1}||` of the damped open baker along a
//! line of spectral parameters, against the polynomial bound.
//!
//! ```bash
//! cargo run --release -p oslab --example resolvent_scan
//! ```

use std::f64::consts::TAU;

use oslab::gap_lab::{neumann_resolvent, power_norm_scan, resolvent_norm_scan, ResolventScanOptions};
use oslab::phase_quant::{baker_open, h_of};
use oslab::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ns = [27, 81, 243];
    let gamma = power_norm_scan(baker_open, 1.0, &ns)?.fitted_gamma.ok_or("no gamma")?;
    let opts = ResolventScanOptions {
        delta: 1.0,
        gamma,
        h0: h_of(243),
        return_time: 1.0,
    };
    let zs: Vec<Complex64> = (0..8).map(|k| Complex64::new(TAU * k as f64 / 8.0, 0.0)).collect();
    let rep = resolvent_norm_scan(baker_open, &opts, &ns, &zs)?;
    println!("gamma = {gamma:.4}, h0 = {:.3e}", opts.h0);
    println!("{:>5} {:>8} {:>10} {:>10} {:>5}", "N", "Re z", "norm", "bound", "gate");
    for e in &rep.entries {
        println!("{:>5} {:>8.4} {:>10.4} {:>10.4} {:>5}", e.n, e.z.re, e.norm, e.bound, e.hypothesis_ok);
    }
    println!("{} violations", rep.violations().len());

    let m = baker_open(81)?;
    let res = neumann_resolvent(&m, 7)?;
    println!(
        "Neumann identity at N = 81: residual {:.2e}, cond {:.3}, residual / (eps cond) = {:.2}",
        res.residual,
        res.cond,
        res.residual / (f64::EPSILON * res.cond)
    );
    Ok(())
}
