//! Finite-dimensional inner-product spaces over an exact field.

pub mod amalgam;
pub mod linalg;
pub mod space;
pub mod witt;

pub use amalgam::{check_perp_independence, orthogonal_amalgam, OrthogonalAmalgam, PerpReport};
pub use linalg::{Mat, Vector};
pub use space::{gram_schmidt, PartialLinearIsometry, QuadraticSpace, Subspace};
pub use witt::{preserves_gram, reflect, reflection_matrix, witt_extend, WittExtension};
