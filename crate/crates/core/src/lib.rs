//! Exact computations on fat point schemes in projective space: Hilbert
//! functions, regularity indices, Segre bounds, and the constructive
//! machinery behind the bound reg(Z) <= max T_j.

pub mod artinian;
pub mod constructions;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod monomial;
pub mod scheme;
pub mod segre;

pub use error::{Error, Result};
pub use geometry::{Flat, LinearForm, ProjPoint};
pub use linalg::{Matrix, Rational};
pub use monomial::{Form, MonomialBasis};
pub use scheme::FatPointScheme;
