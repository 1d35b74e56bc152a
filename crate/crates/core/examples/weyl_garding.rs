//! Weyl quantization on the torus: operator norms approach the symbol
//! supremum at rate about h.
//!
//! ```bash
//! cargo run --release -p oslab --example weyl_garding
//! ```

use oslab::linalg::operator_norm_dense;
use oslab::phase_quant::{h_of, quantize_weyl, SymbolGrid};
use oslab::runner::{named_symbol, SYMBOL_NAMES};
use oslab::stats::loglog_slope;

fn sup_abs(f: fn(f64, f64) -> f64) -> f64 {
    let m = 1024;
    (0..m * m).map(|k| f((k / m) as f64 / m as f64, (k % m) as f64 / m as f64).abs()).fold(0.0, f64::max)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ns = [32, 64, 128, 256];
    for name in SYMBOL_NAMES {
        let f = named_symbol(name).ok_or("unknown symbol")?;
        let sup = sup_abs(f);
        println!("{name}: max|a| = {sup:.6}");
        let mut pts = Vec::new();
        for n in ns {
            let op = quantize_weyl(&SymbolGrid::from_real_fn(n, f), n)?;
            let norm = operator_norm_dense(op.entries());
            println!("  N = {n:>4}  h = {:.3e}  ||Op(a)|| = {norm:.6}  excess = {:+.3e}", h_of(n), norm - sup);
            pts.push((h_of(n), (norm - sup).abs()));
        }
        println!("  fitted exponent {:.3}", loglog_slope(&pts).ok_or("fit failed")?);
    }
    Ok(())
}
