//! Free-group machinery: words acting on a finite space through partial
//! maps, the orbit sets `T_x^y`, triviality of chain products, and finite
//! quotients separating nontrivial products from the identity.

mod automaton;
mod benois;
pub mod oracle;
mod quotient;
mod separate;
mod word;

pub use automaton::OrbitAutomaton;
pub use benois::{benois_trivial, verify_witness, Triviality};
pub use quotient::{
    combine_quotients, combine_within, compose, identity_perm, invert, is_permutation, FiniteQuotient, Perm,
    QuotientGroup, QuotientSubset,
};
pub use separate::{permutations_lex, search_joint, separate_chain, Separation, SeparationBudget};
pub use word::{product_of, reduce_word, Letter, Word};
