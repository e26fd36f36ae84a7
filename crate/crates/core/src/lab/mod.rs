//! Grid realisations of the conjugate generator, its flow and matrix identities.

pub mod flow;
pub mod grid;
pub mod matrix;
pub mod profile;

pub use flow::{flow_map, FlowField};
pub use grid::{
    build_conjugate_generator, commutator_residual, conjugation_flow_check, default_profiles, delta_power,
    symbol_calculus_check, BoundaryScheme, ConjugationReport, Grid, GridOperator, RefinementReport, FLOW_SIGN,
};
pub use matrix::{
    commutator_obstruction, duhamel_identity_check, random_hermitian, random_matrix, required_nodes,
    resolvent_commutator_check, CMatrix, MatrixCheck, Obstruction,
};
pub use profile::{apply_conjugate, conjugate_image, ConjugateImage, PROFILE_STEP};
