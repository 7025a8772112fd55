//! Small-amplitude discrete breathers of Klein–Gordon lattices.

pub mod breather;
pub mod config;
pub mod continuum;
pub mod error;
pub mod fem;
pub mod fit;
pub mod kernel;
pub mod lattice;
pub mod linalg;
pub mod quadrature;
pub mod range;
pub mod spectral;

pub use error::{Error, Result};
