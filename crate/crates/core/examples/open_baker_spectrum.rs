//! Resonances of the open quantum baker's map and the unitarity of its
//! closed counterpart.
//!
//! ```bash
//! cargo run --release -p oslab --example open_baker_spectrum [N]
//! ```

use oslab::gap_lab::{spectrum, SPECTRUM_CAP};
use oslab::linalg::operator_norm_dense;
use oslab::phase_quant::{baker_closed, baker_open};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(243);
    let closed = baker_closed(n)?;
    let unitarity = (closed.entries().adjoint() * closed.entries()
        - oslab::linalg::identity(n))
    .camax();
    println!("closed baker N = {n}: max |U*U - I| = {unitarity:.2e}");

    let open = baker_open(n)?;
    println!("open baker N = {n}: ||M|| = {:.6}", operator_norm_dense(open.entries()));
    let ev = spectrum(&open, SPECTRUM_CAP)?;
    println!("spectral radius {:.6}", ev[0].norm());
    println!("{:>4} {:>12} {:>12} {:>10}", "k", "Re", "Im", "|z|");
    for (k, z) in ev.iter().take(12).enumerate() {
        println!("{k:>4} {:>12.6} {:>12.6} {:>10.6}", z.re, z.im, z.norm());
    }
    let outside = ev.iter().filter(|z| z.norm() > 0.5).count();
    println!("{outside} of {n} eigenvalues outside |z| = 1/2");
    Ok(())
}
