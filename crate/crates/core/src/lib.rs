//! Stabilizer-circuit laboratory for running encoded Clifford Trotter blocks directly or by
//! verified resource teleportation under a trapped-ion Pauli noise model.

pub mod circuit;
pub mod clinr;
pub mod error;
pub mod graph;
pub mod gse;
pub mod harness;
pub mod noise;
pub mod pauli;
pub mod sim;
pub mod trotter;

pub use error::{Error, Result};
