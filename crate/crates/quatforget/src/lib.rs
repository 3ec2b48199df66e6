//! Exact arithmetic for totally indefinite quaternion algebras over Q:
//! Hilbert symbols, maximal orders, Atkin-Lehner groups, principal
//! polarizations and the degrees of the associated forgetful maps.

pub mod arith;
pub mod atkin_lehner;
pub mod eichler;
pub mod error;
pub mod json;
pub mod lattice;
pub mod linalg;
pub mod polarization;
pub mod quaternion;
pub mod search;

pub use error::{Error, Result};
