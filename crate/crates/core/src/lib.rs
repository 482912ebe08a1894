//! Simulation and verification of the strong Borel-Cantelli property on
//! shift spaces.
//!
//! - [`symbolic`]: windows, cylinders and the logarithmic distance
//! - [`processes`]: stationary laws with exact kernels, sampling, mixing
//!   coefficients
//! - [`index`]: polynomial index families and their counting checks
//! - [`bc`]: nonconventional sums `S_N`, `E_N` and their diagnostics
//! - [`applications`]: entropy, maxima of log-distances, hitting times

pub mod applications;
pub mod bc;
pub mod error;
pub mod index;
pub mod processes;
pub mod symbolic;

pub use error::{Error, Result};

/// Crate version, embedded in every summary the runner writes.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
