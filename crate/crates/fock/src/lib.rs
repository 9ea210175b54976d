//! Truncated Fock-space reference simulator.
//!
//! Dense and brute-force: states are vectors over `cutoffⁿ` photon-number
//! configurations and gates are exponentials of truncated quadratic
//! Hamiltonians. Meant for a handful of modes, to check the phase-space engine.

pub mod error;
pub mod operators;
pub mod runner;
pub mod state;

pub use error::{FockError, Result};
pub use operators::{hermite_functions, FockOperators};
pub use runner::{oracle_moments, run_circuit, OracleMoments, OracleRun};
pub use state::{build_gate_unitary, FockState};
