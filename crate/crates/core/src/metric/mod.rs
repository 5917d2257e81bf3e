//! Extending partial isometries of finite metric spaces, metric
//! amalgamation, and the finite independence check.

mod amalgam;
mod chain;
mod extension;
mod space;
mod verify;

pub use amalgam::{amalgamate, check_independence, Amalgam, IndependenceReport};
pub use chain::{cancel_at, chain_distance, drop_trivial, enumerate_chains, merge_zero_leg, shorten, Chain, ChainIter};
pub use extension::{
    automaton_of, canonical_signature, check_postconditions, extend_isometries, product_signatures, Certificate, ExtensionResult,
    FactorRecord, SignatureRecord, Verdict, MAX_SIGNATURES,
};
pub use space::{validate_space, FiniteMetricSpace, PartialIsometry};
pub use verify::{classes_by_definition, verify_data, verify_extension, ExtensionData, Mismatch, VerificationReport};
