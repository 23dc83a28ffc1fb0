use serde::{Deserialize, Serialize};

use super::DaviesRateTable;
use crate::error::{Error, Result};
use crate::lattice::{IsingLattice, Sector, SpinConfig, TorusLattice};

/// A classical single-flip system: an Ising lattice or one Pauli sector of
/// the toric code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SpinSystem {
    Ising { lattice: IsingLattice },
    KitaevSector { lattice: TorusLattice, sector: Sector },
}

/// Energy function and single-flip structure of a [`SpinSystem`].
///
/// Flipping site `i` changes the energy by `ΔE = 2J·k`, where the integer
/// class `k` is `s_i·Σ_nbr s_j` for Ising and the sum of the two adjacent
/// check values for a toric-code sector.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipModel {
    pub system: SpinSystem,
    /// Energy scale J. With J = 1 creating an anyon pair costs 4.
    pub coupling: f64,
    masks: Vec<Vec<u64>>,
}

impl FlipModel {
    pub fn ising(lattice: IsingLattice, coupling: f64) -> Result<Self> {
        Self::new(SpinSystem::Ising { lattice }, coupling)
    }

    pub fn kitaev(lattice: TorusLattice, sector: Sector, coupling: f64) -> Result<Self> {
        Self::new(SpinSystem::KitaevSector { lattice, sector }, coupling)
    }

    pub fn new(system: SpinSystem, coupling: f64) -> Result<Self> {
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::domain("coupling", format!("J must be finite and > 0, got {coupling}")));
        }
        let mut m = Self { system, coupling, masks: Vec::new() };
        if m.n_sites() <= 64 {
            m.masks = (0..m.n_sites()).map(|i| m.site_masks(i)).collect();
        }
        Ok(m)
    }

    pub fn n_sites(&self) -> usize {
        match &self.system {
            SpinSystem::Ising { lattice } => lattice.n_sites(),
            SpinSystem::KitaevSector { lattice, .. } => lattice.n_edges(),
        }
    }

    /// Largest |k|.
    pub fn max_class(&self) -> i32 {
        match &self.system {
            SpinSystem::Ising { lattice } => lattice.degree() as i32,
            SpinSystem::KitaevSector { .. } => 2,
        }
    }

    /// Possible values of k, ascending.
    pub fn classes(&self) -> Vec<i32> {
        let m = self.max_class();
        (-m..=m).step_by(2).collect()
    }

    pub fn delta_energy(&self, class: i32) -> f64 {
        2.0 * self.coupling * class as f64
    }

    /// The Bohr frequencies ±ΔE a rate table must cover.
    pub fn bohr_frequencies(&self) -> Vec<f64> {
        self.classes().iter().map(|&k| self.delta_energy(k)).collect()
    }

    /// Per-class flip rates `rate(−ΔE)`, indexed by `(k + max_class) / 2`.
    pub fn flip_rates(&self, table: &DaviesRateTable) -> Result<Vec<f64>> {
        self.classes()
            .iter()
            .map(|&k| {
                let w = -self.delta_energy(k);
                table.rate(w).ok_or_else(|| Error::domain("rates", format!("rate table has no entry for ω = {w}")))
            })
            .collect()
    }

    pub fn class_index(&self, class: i32) -> usize {
        ((class + self.max_class()) / 2) as usize
    }

    /// Interaction terms as site sets: Ising bonds or toric-code checks.
    /// The energy is `−J Σ_t Π_{i∈t} s_i` and the class of site `i` is the
    /// sum of the values of the terms containing it.
    pub fn terms(&self) -> Vec<Vec<usize>> {
        match &self.system {
            SpinSystem::Ising { lattice } => lattice.bonds().into_iter().map(|(a, b)| vec![a, b]).collect(),
            SpinSystem::KitaevSector { lattice, sector } => {
                (0..lattice.n_cells()).map(|c| lattice.check(*sector, c).to_vec()).collect()
            }
        }
    }

    /// Bitmasks whose parities give the class of site `i`: for Ising the
    /// neighbour singletons, for toric code the two adjacent checks.
    fn site_masks(&self, i: usize) -> Vec<u64> {
        match &self.system {
            SpinSystem::Ising { lattice } => lattice.neighbors(i).iter().map(|&j| 1u64 << j).collect(),
            SpinSystem::KitaevSector { lattice, sector } => lattice
                .edge_cells(*sector, i)
                .iter()
                .map(|&c| lattice.check(*sector, c).iter().fold(0u64, |m, &e| m | 1 << e))
                .collect(),
        }
    }

    /// Class of flipping site `i` in the configuration encoded by `bits`
    /// (bit set ⇔ value −1). Requires at most 64 sites.
    pub fn class_bits(&self, bits: u64, i: usize) -> i32 {
        let value = |m: u64| if (bits & m).count_ones() & 1 == 1 { -1 } else { 1 };
        let masks = &self.masks[i];
        match &self.system {
            SpinSystem::Ising { .. } => {
                let si = value(1 << i);
                si * masks.iter().map(|&m| value(m)).sum::<i32>()
            }
            SpinSystem::KitaevSector { .. } => masks.iter().map(|&m| value(m)).sum(),
        }
    }

    pub fn energy_bits(&self, bits: u64) -> f64 {
        let value = |m: u64| if (bits & m).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
        let j = self.coupling;
        match &self.system {
            SpinSystem::Ising { lattice } => {
                -j * lattice.bonds().iter().map(|&(a, b)| value(1 << a | 1 << b)).sum::<f64>()
            }
            SpinSystem::KitaevSector { lattice, sector } => {
                -j * (0..lattice.n_cells())
                    .map(|c| value(lattice.check(*sector, c).iter().fold(0u64, |m, &e| m | 1 << e)))
                    .sum::<f64>()
            }
        }
    }

    pub fn class(&self, config: &SpinConfig, i: usize) -> i32 {
        match &self.system {
            SpinSystem::Ising { lattice } => {
                config.get(i) as i32 * lattice.neighbors(i).iter().map(|&j| config.get(j) as i32).sum::<i32>()
            }
            SpinSystem::KitaevSector { lattice, sector } => lattice
                .edge_cells(*sector, i)
                .iter()
                .map(|&c| lattice.check(*sector, c).iter().map(|&e| config.get(e) as i32).product::<i32>())
                .sum(),
        }
    }

    pub fn energy(&self, config: &SpinConfig) -> f64 {
        let j = self.coupling;
        match &self.system {
            SpinSystem::Ising { lattice } => {
                -j * lattice.bonds().iter().map(|&(a, b)| (config.get(a) * config.get(b)) as f64).sum::<f64>()
            }
            SpinSystem::KitaevSector { lattice, sector } => {
                -j * (0..lattice.n_cells())
                    .map(|c| lattice.check(*sector, c).iter().map(|&e| config.get(e) as f64).product::<f64>())
                    .sum::<f64>()
            }
        }
    }
}
