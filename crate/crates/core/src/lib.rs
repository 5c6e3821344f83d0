//! Branch and bound for mixed-integer linear and quadratic programs, together
//! with an exact certifier of its iteration and node counts over a
//! parameter region.

pub mod bnb_cert;
pub mod bnb_online;
pub mod error;
pub mod harness;
pub mod mp_cert;
pub mod poly_geom;
pub mod problems;
pub mod quad_compare;
pub mod relax_solver;
mod serde_mat;
pub mod tol;

pub use error::{Error, Result};
