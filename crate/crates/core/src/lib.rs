//! Thermodynamic state conversion under energy conservation: how far an
//! object sits from equilibrium, which conversions are possible, and how cold
//! a qubit can be made with its help.

pub mod conversion;
pub mod deviation;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod model;
pub mod typical_sim;
pub mod unitary;

#[cfg(test)]
mod strategies;

pub use error::{Error, Result};
pub use model::{Object, QuantumObject, QuasiClassicalObject, Qubit};

/// Limits on exhaustive enumerations and dense matrix sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub enumeration: u128,
    pub matrix_dim: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            enumeration: 10_000_000,
            matrix_dim: 512,
        }
    }
}
