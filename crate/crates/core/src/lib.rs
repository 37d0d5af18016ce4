//! Simulation and verification lab for the parabolic Anderson model
//! `∂_t u = Δu + ξ·u` on hyperbolic space `H^d`, with a stationary Gaussian
//! potential of compactly supported covariance.
//!
//! The crate is organised by subsystem:
//!
//! * [`hypgeo`]: hyperboloid-model geometry, ball volumes, packings.
//! * [`gaussfield`]: covariance kernels, exact and conditional field sampling,
//!   extremes, islands and clusters.
//! * [`hypbm`]: hyperbolic Brownian motion, radial SDE, bridges, path energy.
//! * [`heatkernel`]: comparison function, exact `H³`/`H²` kernels, calibration.
//! * [`varopt`]: the variational functional, its optimiser, and inequality fuzzers.
//! * [`fkmc`]: Feynman-Kac estimators, routes over clusters, route budgets.
//! * [`cli`]: configuration, dispatch and output writing for the `hypam` binary.
//!
//! Time is always measured with generator `Δ` (not `Δ/2`): Brownian increments
//! have covariance `2·dt·Id`.

pub mod cli;
pub mod error;
pub mod fkmc;
pub mod gaussfield;
pub mod heatkernel;
pub mod hypbm;
pub mod hypgeo;
pub mod numerics;
pub mod rng;
pub mod stats;
pub mod varopt;

pub use error::{Error, Result};
pub use hypgeo::HPoint;
