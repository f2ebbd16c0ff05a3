//! Greedy Tikhonov inversion of satellite gravity data on the sphere.
//!
//! The library discretizes the downward-continuation problem for a
//! spherical-harmonic expansion, solves it with two matching-pursuit
//! variants (plain and orthogonalized with restarts), picks the Tikhonov
//! parameter by a family of heuristic rules, and benchmarks those rules
//! against the oracle-best parameter on synthetic data.

pub mod bench;
pub mod error;
pub mod forward;
pub mod noise;
pub mod select;
pub mod solver;
pub mod sphere;

pub use error::{Error, Result};
