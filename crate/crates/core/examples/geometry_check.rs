//! Disjointness and no-eclipse checks on a few obstacle configurations.
//!
//! ```bash
//! cargo run --release -p oslab --example geometry_check [obstacles.csv]
//! ```

use oslab::geometry::{check_disjoint, check_no_eclipse, ObstacleConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut configs = vec![
        ("two discs, distance 6", ObstacleConfig::two_discs(6.0, 1.0)?),
        ("two discs, distance 1.5", ObstacleConfig::two_discs(1.5, 1.0)?),
        ("triangle, side 6", ObstacleConfig::triangle(6.0, 1.0)?),
        ("triangle, side 2.5", ObstacleConfig::triangle(2.5, 1.0)?),
        (
            "middle disc in the way",
            ObstacleConfig::from_triples(&[[0.0, 0.0, 1.0], [10.0, 0.0, 1.0], [5.0, 0.5, 1.0]])?,
        ),
    ];
    if let Some(path) = std::env::args().nth(1) {
        configs.push(("from file", ObstacleConfig::load(&path)?));
    }
    println!("{:<26} {:>6} {:>9} {:>11}", "configuration", "discs", "disjoint", "no-eclipse");
    for (name, c) in &configs {
        let disjoint = check_disjoint(c)?;
        let clear = if disjoint { check_no_eclipse(c)?.to_string() } else { "-".into() };
        println!("{name:<26} {:>6} {disjoint:>9} {clear:>11}", c.len());
    }
    Ok(())
}
