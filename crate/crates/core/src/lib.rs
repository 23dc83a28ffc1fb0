//! Numerical models of thermally noisy quantum memories: KMS baths, Davies
//! generators for toric-code and Ising sectors, kinetic Monte Carlo, and
//! memory-lifetime studies.

pub mod bath;
pub mod davies;
pub mod dynamics;
pub mod lattice;
pub mod memory;
pub mod error;
pub mod errormap;

pub use error::{Error, Result};
