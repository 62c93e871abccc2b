//! Density-matrix simulation of noisy random Clifford encoding-decoding
//! circuits, with exact robustness of magic, stabilizer Renyi entropies and
//! closed-form annealed fidelities.

pub mod analytic;
pub mod channels;
pub mod clifford;
mod error;
pub mod magic;
pub mod par;
pub mod protocol;
pub mod qcore;

pub use error::{Error, Result};
