//! Simulation back ends: an exact stabilizer tableau, a batched Pauli-frame sampler and a
//! dense statevector oracle.

mod frame;
mod statevec;
mod tableau;

pub use frame::{run_batch, ShotBatch, BLOCK_SHOTS};
pub use statevec::{oracle_state, StateVector, ORACLE_MAX_QUBITS};
pub use tableau::{reference_sample, run_shot, stabilizer_state, Measurement, Tableau};
