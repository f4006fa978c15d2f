//! Exact-arithmetic kernel for symmetric tensor algebras and their norm
//! maps, divided powers, multivalued morphisms over finite sets, and the
//! Čech-complex combinatorics of finite covers.
//!
//! Everything computes over an exact base-ring tower (integers, rationals,
//! prime fields, sparse multivariate polynomials); identities are checked to
//! equality, never approximately.

pub mod algebra;
pub mod error;
pub mod linalg;
pub mod perm;
pub mod ring;
pub mod samples;
pub mod symfun;

pub use error::{Error, Result};
