//! Finite measure algebras over a cell space with exact measures.

pub mod algebra;
pub mod amalgam;
pub mod good;
pub mod matrix;

pub use algebra::{measure_profile, refinement_parents, Algebra, CellSpace, Refinement};
pub use amalgam::{check_malg_independence, check_product, independent_amalgam, MalgAmalgam, MalgIndependence};
pub use good::{
    extend_partial, extend_partial_automorphisms, good_check, good_check_with, independence_step,
    verify_extension_malg, verify_extension_malg_with, GoodReport, MalgExtension, MalgFailure, MalgReport,
    PartialAut, StepRecord, MAX_INDUCTION_ATOMS, MAX_VERIFY_ATOMS,
};
pub use matrix::{check_realization, matrix_of_automorphism, p_additive, realize_matrix, Matrix, Realization};
