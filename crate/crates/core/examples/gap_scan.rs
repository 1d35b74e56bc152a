//! Power-norm scans `||M^N(h)||` for the open baker and the dilation model,
//! with the fitted decay exponent gamma.
//!
//! ```bash
//! cargo run --release -p oslab --example gap_scan
//! ```

use oslab::gap_lab::{power_norm_scan, GapReport};
use oslab::phase_quant::{baker_open, dilation_model};

fn show(name: &str, rep: &GapReport) {
    println!("{name} (delta = {})", rep.delta);
    println!("  {:>5} {:>10} {:>6} {:>12} {:>9}", "N", "h", "N(h)", "||M^N(h)||", "amp_sup");
    for e in &rep.entries {
        println!("  {:>5} {:>10.3e} {:>6} {:>12.6} {:>9.4}", e.n, e.h, e.n_of_h, e.power_norm, e.amp_sup);
    }
    let fmt = |g: Option<f64>| g.map_or("-".to_string(), |g| format!("{g:.4}"));
    println!(
        "  gamma {} (with prefactor {})",
        fmt(rep.fitted_gamma),
        fmt(rep.gamma_with_prefactor)
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    show("open baker", &power_norm_scan(baker_open, 1.0, &[27, 81, 243, 729])?);
    show("dilation model", &power_norm_scan(|n| dilation_model(n, 0.1), 1.0, &[32, 64, 128, 256])?);
    Ok(())
}
