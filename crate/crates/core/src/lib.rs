//! Survival amplitudes, decay exponents and commutator identities for
//! self-adjoint operators given in spectral representation.

pub mod checks;
pub mod decay;
pub mod error;
pub mod lab;
pub mod propagator;
pub mod quad;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
