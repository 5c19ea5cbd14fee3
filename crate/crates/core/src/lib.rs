//! Sidelink ranging and positioning toolkit for sub-6 GHz V2X links.
//!
//! The crate is organised bottom-up:
//!
//! - [`propagation`]: intersection scenarios, constant-velocity trajectories and an
//!   image-method multipath synthesizer (line of sight, ground bounce, facade reflections).
//! - [`signal`]: OFDM pilot grids and frequency-domain received-signal synthesis.
//! - [`bounds`]: Fisher information for the multipath OFDM model and the three
//!   range-error bounds (LoS-only, all-paths, weighted-average approximation).
//! - [`estimation`]: windowed IDFT delay spectrum, peak picking and round-trip ranging.
//! - [`positioning`]: closed-form multilateration and weighted Gauss-Newton refinement.
//! - [`harness`]: Monte Carlo sweeps, requirement-set scoring and CSV export.
//!
//! Runnable walkthroughs for each capability live in the crate's `examples/` directory.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod harness;
pub mod positioning;
pub mod propagation;
pub mod scenario_file;
pub mod signal;

pub use error::{Error, Result};
pub use geometry::{Pose, Vec3};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
