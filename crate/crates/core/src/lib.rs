//! Numerical laboratory for scattering by convex obstacles and open quantum
//! maps.
//!
//! The crate is organized by subsystem:
//!
//! - [`geometry`]: disc obstacle configurations, disjointness and the
//!   no-eclipse condition.
//! - [`billiard`]: the open billiard map and shadow map on the boundary
//!   coball bundle, periodic orbits, monodromy, trapped-set covers.
//! - [`phase_quant`]: Weyl quantization on the torus, the open baker's map,
//!   the dilation model, damping and escape-function conjugation.
//! - [`gap_lab`]: power-norm scans, the Neumann resolvent identity,
//!   resolvent-norm bounds and resonance spectra of open quantum maps.
//! - [`wave_decay`]: an exterior-domain FDTD wave solver measuring local
//!   energy decay, and matrix-scale checks of the semigroup contour formula.
//! - [`runner`]: the experiment runner behind the `oslab` binary.
//!
//! Every capability has a runnable example under `examples/`:
//!
//! ```bash
//! cargo run --release -p oslab --example open_baker_spectrum
//! ```

pub mod billiard;
pub mod gap_lab;
pub mod geometry;
pub mod linalg;
pub mod phase_quant;
pub mod runner;
pub mod stats;
pub mod svg;
pub mod wave_decay;

pub use num_complex::Complex64;
