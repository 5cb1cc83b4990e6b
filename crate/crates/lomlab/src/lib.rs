//! Finite-dimensional models of transitive operator algebras over the reals.
//!
//! The crate builds matrix algebras from generators, computes commutants,
//! decides transitivity, recognizes the commutant as R, C or H, measures
//! minimal rank and density degree, and constructs the model families
//! (partial complex structures, quaternion group representations) together
//! with the dimension-sequence criterion for isomorphism of operator ranges.

pub mod algebra;
pub mod classify;
pub mod construct;
pub mod division;
pub mod error;
pub mod instance;
pub mod numeric;
pub mod ranges;

pub use error::{Error, Result};
pub use numeric::{RealMatrix, Tolerance, Vector};
