use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic ring (dimension 1) or L×L torus (dimension 2) of Ising spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IsingLattice {
    dimension: usize,
    size: usize,
    neighbors: Vec<Vec<usize>>,
}

impl IsingLattice {
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain("N", format!("ring needs at least 3 sites, got {n}")));
        }
        let neighbors = (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect();
        Ok(Self { dimension: 1, size: n, neighbors })
    }

    /// Site `r·L + c`; neighbours listed as up, down, left, right.
    pub fn square(l: usize) -> Result<Self> {
        if l < 3 {
            return Err(Error::domain("L", format!("square lattice needs L ≥ 3, got {l}")));
        }
        let neighbors = (0..l * l)
            .map(|i| {
                let (r, c) = (i / l, i % l);
                vec![((r + l - 1) % l) * l + c, ((r + 1) % l) * l + c, r * l + (c + l - 1) % l, r * l + (c + 1) % l]
            })
            .collect();
        Ok(Self { dimension: 2, size: l, neighbors })
    }

    pub fn new(dimension: usize, size: usize) -> Result<Self> {
        match dimension {
            1 => Self::ring(size),
            2 => Self::square(size),
            d => Err(Error::domain("dimension", format!("must be 1 or 2, got {d}"))),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// N for a ring, L for a square lattice.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_sites(&self) -> usize {
        self.neighbors.len()
    }

    pub fn degree(&self) -> usize {
        2 * self.dimension
    }

    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.neighbors[site]
    }

    /// Each bond once, as (i, j) with j the next site along a lattice direction.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_sites() * self.dimension);
        for i in 0..self.n_sites() {
            for &j in self.neighbors[i].iter().skip(1).step_by(2) {
                out.push((i, j));
            }
        }
        out
    }
}
