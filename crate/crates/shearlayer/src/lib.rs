//! Dispersion of small-amplitude waves in a sheared incompressible elastic
//! layer: the decay-exponent quartic, the traction-free-boundary determinant,
//! high-speed asymptotic mode families, and parameter sweeps over wavenumber.

pub mod asymptotic;
pub mod dispersion;
pub mod error;
pub mod material;
pub mod parallel;
pub mod quartic;
pub mod sweep;

pub use error::{Error, Result};
