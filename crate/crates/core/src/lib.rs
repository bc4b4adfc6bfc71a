//! Finite-dimensional core of the multi-bump ring construction for the prescribed
//! scalar curvature problem.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balance;
pub mod bubbles;
pub mod circulant;
pub mod errfield;
pub mod error;
pub mod model;
pub mod nondegen;
mod quad;
pub mod reduced;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{Configuration, DerivedScales, ProblemParams};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
