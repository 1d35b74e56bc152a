//! Local energy decay of the wave equation in free space and outside three
//! discs, measured with the FDTD solver.
//!
//! ```bash
//! cargo run --release -p oslab --example wave_decay [nx] [t_final]
//! ```

use oslab::geometry::{ObstacleConfig, Vec2};
use oslab::wave_decay::{fdtd_run, FdtdOptions, PulseKind, WaveGrid, WaveGridSpec, WaveState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let nx: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(256);
    let t_final: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(60.0);
    let spec = WaveGridSpec {
        extent: 100.0,
        nx,
        absorber_width: nx / 10,
        ..WaveGridSpec::default()
    };
    let opts = FdtdOptions {
        t_final,
        r: 10.0,
        stride: 20,
    };
    let triangle = ObstacleConfig::triangle(6.0, 1.0)?;
    for (name, obstacles) in [("free space", None), ("three discs", Some(&triangle))] {
        let grid = WaveGrid::new(&spec, obstacles)?;
        let data = WaveState::pulse(&grid, Vec2::new(0.0, 0.0), 1.5, PulseKind::Velocity);
        let trace = fdtd_run(&grid, &data, &opts)?;
        println!("{name}: dx = {:.4}, dt = {:.4}", grid.dx, grid.dt);
        for s in trace.samples.iter().step_by(4) {
            println!("  t = {:>7.2}  E_R = {:.4e}  E = {:.4e}", s.t, s.e_r, s.e_total);
        }
        match trace.fitted_slope {
            Some(p) => println!("  log-log slope over [T/4, T]: {p:.3}"),
            None => println!("  not enough samples for a slope"),
        }
    }
    Ok(())
}
