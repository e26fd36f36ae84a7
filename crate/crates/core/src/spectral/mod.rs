//! Hamiltonians, states and spectral densities in the spectral representation.

mod density;
mod model;
mod state;

pub use density::{density_of, evanescent_class, lifetime_norm_frequency, EvanescentClass, SpectralDensity};
pub use model::{
    build_model, ExponentRule, ModelId, ModelSpec, Rate, RealFn, Requirement, RuleTag, Symbol, Weight,
};
pub use state::{catalog_state, derive_flags, RegularityFlags, SpectralState, StateId, MAX_ORDER};
