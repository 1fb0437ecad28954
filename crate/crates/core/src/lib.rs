//! Steady states of two coupled qubits between two thermal reservoirs, with
//! entanglement, directional EPR steering and Bell nonlocality classification
//! and steady-state transport.
//!
//! Energies are in units of the mean qubit frequency unless stated otherwise;
//! `hbar = k_B = 1`.

pub mod analysis;
pub mod correlations;
pub mod error;
pub mod generator;
pub mod model;
pub mod output;
pub mod rates;
pub mod steady;
pub mod transport;

pub use error::{Error, Result};
pub use model::{Basis, DensityMatrix4, Phase, SystemParams};
pub use rates::{ReservoirSpec, Statistics};
