pub mod error;
pub mod exact;
pub mod freegroup;
pub mod hilbert;
pub mod malg;
pub mod metric;

pub use error::{Error, ErrorClass, Result};
pub use exact::{ExactField, Quadratic};
pub use num_rational::BigRational;

/// Scalar used by the file formats: rationals or one real quadratic field.
pub type Scalar = Quadratic;
/// Purely rational scalars.
pub type Rational = BigRational;
