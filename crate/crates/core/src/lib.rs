//! A finite-cutoff model of the dagger compact category of truncated Hilbert
//! spaces: objects are orthonormal families inside an ambient space,
//! morphisms are matrices between them, and every structural law is checked
//! numerically.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dsl;
pub mod error;
pub mod fields;
pub mod frobenius;
pub mod groups;
pub mod hilb;
pub mod qho;
pub mod report;
pub mod sparse;
pub mod systems;

pub use error::{Error, Result};
pub use hilb::{Morphism, Scalar, TruncatedSpace, DEFAULT_TOL};
pub use report::CheckReport;
