use serde::{Deserialize, Serialize};

use super::{Sector, TorusLattice};
use crate::error::{Error, Result};

/// ±1 values on sites (Ising) or edges (toric-code sector).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfig {
    values: Vec<i8>,
}

impl SpinConfig {
    pub fn all_up(n: usize) -> Self {
        Self { values: vec![1; n] }
    }

    pub fn from_values(values: Vec<i8>) -> Result<Self> {
        if let Some(i) = values.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::domain("config", format!("entry {i} is {}, expected ±1", values[i])));
        }
        Ok(Self { values })
    }

    /// Bit i set ⇔ value i is −1.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        Self { values: (0..n).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect() }
    }

    pub fn to_bits(&self) -> u64 {
        debug_assert!(self.values.len() <= 64);
        self.values.iter().enumerate().fold(0, |acc, (i, &v)| if v < 0 { acc | 1 << i } else { acc })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn get(&self, i: usize) -> i8 {
        self.values[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.values[i] = -self.values[i];
    }

    /// Flips every index in `chain` (repeated indices cancel).
    pub fn apply_chain(&mut self, chain: &[usize]) {
        for &e in chain {
            self.flip(e);
        }
    }

    pub fn sum(&self) -> i64 {
        self.values.iter().map(|&v| v as i64).sum()
    }
}

/// Violated-check flags, one per plaquette (Zlike) or star (Xlike).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SyndromeConfig {
    pub sector: Sector,
    flags: Vec<bool>,
}

impl SyndromeConfig {
    pub fn new(sector: Sector, flags: Vec<bool>) -> Self {
        Self { sector, flags }
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn anyons(&self) -> Vec<usize> {
        self.flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect()
    }
}

pub fn syndrome(lattice: &TorusLattice, config: &SpinConfig, sector: Sector) -> Result<SyndromeConfig> {
    if config.len() != lattice.n_edges() {
        return Err(Error::domain(
            "config",
            format!("has {} entries, lattice has {} edges", config.len(), lattice.n_edges()),
        ));
    }
    let flags = (0..lattice.n_cells())
        .map(|cell| lattice.check(sector, cell).iter().map(|&e| config.get(e)).product::<i8>() < 0)
        .collect();
    Ok(SyndromeConfig::new(sector, flags))
}
