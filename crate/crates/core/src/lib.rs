//! Computational toolkit for SL2(Z) congruence-subgroup orbits, character-twisted
//! weights, SL2(R) harmonic analysis and determinant-equation counting.

// Negated comparisons such as `!(y > 0.0)` deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod error;
#[doc(hidden)]
pub mod fault;
pub mod geometry;
pub mod orbits;
pub mod quadrature;
pub mod report;
pub mod spectral;
pub mod characters;
pub mod counting;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
