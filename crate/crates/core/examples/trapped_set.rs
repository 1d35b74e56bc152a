//! Box covers of the trapped set, its box-counting dimension and the mean
//! expansion rate along trapped orbits.
//!
//! ```bash
//! cargo run --release -p oslab --example trapped_set [side] [depth]
//! ```

use oslab::billiard::{cover_dimension, lyapunov_from_cover, trapped_set_covers, CoverOptions};
use oslab::geometry::ObstacleConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let side: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(6.0);
    let depth: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(8);
    let config = ObstacleConfig::triangle(side, 1.0)?;
    let covers = trapped_set_covers(&config, depth, &CoverOptions::default());
    println!("triangle of unit discs, side {side}");
    println!("{:>6} {:>8} {:>12}", "depth", "boxes", "area");
    for c in &covers {
        println!("{:>6} {:>8} {:>12.4e}", c.depth, c.box_count(), c.total_area);
    }
    match cover_dimension(&covers, depth / 2) {
        Some(d) => println!("box-counting dimension {d:.4}"),
        None => println!("box-counting dimension unavailable"),
    }
    let finest = covers.last().ok_or("no covers")?;
    println!("expansion rate per bounce {:.4}", lyapunov_from_cover(&config, finest, 40)?);
    Ok(())
}
