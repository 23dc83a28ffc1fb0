//! Toric-code and Ising lattice geometry, syndromes, logical loops and
//! homology.

mod config;
mod export;
mod homology;
mod ising;
mod logical;
mod torus;

pub use config::{syndrome, SpinConfig, SyndromeConfig};
pub use export::{EdgeRecord, LatticeDescription};
pub use homology::{dual_homology_class, error_homology, homology_class};
pub use ising::IsingLattice;
pub use logical::{bare_logical_value, HomologyLabel, LogicalOperator};
pub use torus::{build_torus, EdgeKind, Sector, TorusLattice};
