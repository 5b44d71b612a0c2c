//! Nonlinear semigroups generated by accretive operators, with executable
//! convergence moduli and certified rates for orbits and almost-orbits.

// Guards of the form `!(x > 0.0)` are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod harness;
pub mod moduli;
pub mod operators;
pub mod rates;
pub mod semigroup;
pub mod space;

pub use error::{Error, Result};
pub use space::Point;
