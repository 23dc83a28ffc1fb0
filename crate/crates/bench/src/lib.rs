//! Fixtures shared by the benchmarks.

use qmemlab::bath::SpectralDensityModel;
use qmemlab::davies::{build_rates, DaviesRateTable, FlipModel};
use qmemlab::lattice::{IsingLattice, Sector, TorusLattice};

/// Flat KMS bath with R = 1, Ω = 10.
pub fn flat_bath(beta: f64) -> SpectralDensityModel {
    SpectralDensityModel::flat_kms(1.0, 10.0, beta).expect("valid bath")
}

pub fn rates_for(model: &FlipModel, beta: f64) -> DaviesRateTable {
    build_rates(&flat_bath(beta), &model.bohr_frequencies(), 1.0).expect("rates")
}

pub fn ring(n: usize) -> FlipModel {
    FlipModel::ising(IsingLattice::ring(n).expect("ring"), 1.0).expect("model")
}

pub fn square(l: usize) -> FlipModel {
    FlipModel::ising(IsingLattice::square(l).expect("square"), 1.0).expect("model")
}

pub fn toric(l: usize) -> FlipModel {
    FlipModel::kitaev(TorusLattice::new(l).expect("torus"), Sector::Zlike, 1.0).expect("model")
}
