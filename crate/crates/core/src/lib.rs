//! Exact workbench for anti-blocking lattice polytopes and their unconditional
//! reflections: lattice points and IDP, toric fibers and quadratic generation,
//! the ascending and descending generator transfers, and the stable set /
//! Kempe equivalence application.

pub mod error;
pub mod fibers;
pub mod hull;
pub mod lattice;
pub mod polytope;
pub mod search;
pub mod stable_sets;
pub mod transfer;

pub use error::{Error, Result};
