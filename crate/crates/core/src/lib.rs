//! High-temperature cluster expansion of `log Tr[e^{-βH} ρ]` for long-range
//! k-body spin Hamiltonians, with an exact-diagonalization reference.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expansion;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod polymers;
pub mod stats;

pub use error::{Error, Result};
