//! Möbius disjointness laboratory for noncommutative flows.

pub mod car_fock;
pub mod error;
pub mod experiment;
pub mod flows;
pub mod free_words;
pub mod linalg;
pub mod matrix_dynamics;
pub mod moebius;
pub mod summation;

pub use error::{Error, Result};
