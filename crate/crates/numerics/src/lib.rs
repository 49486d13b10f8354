//! Numeric ground truth for the symbol pipeline.
//!
//! [`slab`] solves the Beltrami boundary value problem mode by mode on a flat
//! torus slab with a normal-only metric profile, giving a discrete
//! normal-to-tangential map. [`bfields`] builds current loops in Euclidean
//! space and the Beltrami fields they generate.

pub mod bfields;
pub mod error;
pub mod fit;
pub mod ode;
pub mod slab;

pub use error::{NumericsError, Result};

/// Crate version, recorded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
