//! Exact-arithmetic analysis of prepare-measure scenarios for generalized
//! noncontextuality.
//!
//! The crate is layered bottom-up:
//!
//! * [`linalg`]: rationals, exact elimination, simplex with Farkas certificates.
//! * [`quantum`]: a small dense complex-matrix kernel and the Born rule.
//! * [`scenario`]: prepare-measure scenarios, operational equivalences,
//!   outcome padding and flag-convexification.
//! * [`polytope`]: double-description conversion between H- and V-representations.
//! * [`noncontext`]: response polytopes, noncontextuality inequalities,
//!   membership tests and ontological-model transfer.
//! * [`compat`]: measurement compatibility (joint measurability).

pub mod error;
pub mod linalg;
pub mod quantum;
pub mod polytope;
pub mod scenario;
pub mod noncontext;
pub mod fixtures;
pub mod compat;

pub use error::{Error, Result};
