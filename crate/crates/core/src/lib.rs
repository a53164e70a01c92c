//! Exact computer algebra for the noncommutative KdV hierarchy and the
//! intersection numbers it predicts.

pub mod diffpoly;
pub mod error;
pub mod fourier;
pub mod hierarchy;
pub mod linalg;
pub mod predictors;
pub mod psido;
pub mod scalar;
pub mod series;
pub mod stablegraphs;
pub mod tausolver;

pub use diffpoly::{DiffPoly2, Monomial2};
pub use error::{Error, ParseError, Result};
pub use psido::{PsiDO, Truncation};
pub use scalar::{Rational, Scalar};
