//! Periodic billiard orbits, their monodromy and expansion rates.
//!
//! ```bash
//! cargo run --release -p oslab --example periodic_orbits
//! ```

use oslab::billiard::{find_periodic_orbit, OrbitOptions};
use oslab::geometry::ObstacleConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = OrbitOptions::default();
    let cases: [(&str, ObstacleConfig, Vec<Vec<usize>>); 2] = [
        ("two discs, distance 6", ObstacleConfig::two_discs(6.0, 1.0)?, vec![vec![0, 1]]),
        (
            "triangle, side 6",
            ObstacleConfig::triangle(6.0, 1.0)?,
            vec![vec![0, 1], vec![0, 1, 2], vec![0, 1, 0, 2]],
        ),
    ];
    for (name, config, words) in &cases {
        println!("{name}");
        println!("  {:<16} {:>12} {:>14} {:>10} {:>10}", "word", "length", "mu", "det", "rate");
        for w in words {
            let orbit = find_periodic_orbit(config, w, &opts)?;
            let (mu, _) = orbit.multipliers().ok_or("complex multipliers")?;
            println!(
                "  {:<16} {:>12.8} {:>14.6e} {:>10.2e} {:>10.6}",
                format!("{w:?}"),
                orbit.length,
                mu,
                orbit.monodromy_matrix().determinant() - 1.0,
                orbit.lyapunov()
            );
        }
    }
    println!("(det column is det - 1; rate is log|mu| per bounce)");
    Ok(())
}
