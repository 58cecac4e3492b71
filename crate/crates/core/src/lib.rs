//! Numerical laboratory for inverse spectral problems with a single passive
//! measurement on the discretized flat 2-torus.

// `!(x <= tol)` is used on purpose so NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod extraction;
pub mod field;
pub mod pipeline;
pub mod recovery;
pub mod scenario;
pub mod sparsity;
pub mod spectral;
pub mod torus;

pub use error::{Error, Result};
pub use field::{ComplexField, GridField};
pub use torus::{ObservationSet, TorusGrid};
