//! Schatten norms, erasure-channel norms, entropy functionals, inequality checks,
//! counterexample search and common-randomness bounds on small qubit systems.

// `!(x >= a)` style guards intentionally reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crg;
pub mod entropy;
pub mod erasure;
pub mod error;
pub mod linalg;
pub mod qops;
pub mod search;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use qops::{QubitOperator, SubsetMask};
