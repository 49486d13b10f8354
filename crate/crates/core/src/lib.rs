//! Symbolic core: jet arithmetic, the symbol calculus on a two-dimensional
//! boundary, the Hodge Dirichlet-to-Neumann and Beltrami normal-to-tangential
//! symbol recursions, and recovery of the boundary metric jet from the
//! normal-to-tangential symbol.

pub mod error;
pub mod hodge_dn;
pub mod jets;
pub mod nt_map;
pub mod rational;
pub mod recovery;
pub mod scalar;
pub mod symbols;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};

/// Crate version, recorded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
