//! Fanout and broadcast schedules for qubits with power-law interactions,
//! exact small-system simulation, and operator-spreading diagnostics.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod lattice;
pub mod numeric;
pub mod protocols;
pub mod qft;
pub mod schedule;
pub mod simulator;
pub mod spreading;

pub use error::{Error, Result};
