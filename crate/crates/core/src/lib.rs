//! Lagrangian and Hamiltonian mechanics on the horizontal and vertical
//! distributions of tangent and cotangent bundles.

pub mod error;
pub mod adapted;
pub mod bridge;
pub mod check;
pub mod cli;
pub mod forms;
pub mod hamiltonian;
pub mod identities;
pub mod integrate;
pub mod lagrangian;
pub mod symbolic;

pub use error::{Error, Result};
