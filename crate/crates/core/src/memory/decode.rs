use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{LogicalOperator, SpinConfig, SyndromeConfig, TorusLattice};

/// Largest anyon count matched exactly.
pub const EXACT_MATCHING_LIMIT: usize = 14;

/// Majority correction for the Ising analog: `F = majority · bare`, so the
/// dressed value `bare · F` is the majority sign. Zero sums count as +1.
pub fn decode_majority(config: &SpinConfig, designated: usize) -> i8 {
    crate::dynamics::majority(config.values()) * config.get(designated)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    /// Edges of the correction, each listed once per use.
    pub chain: Vec<usize>,
    /// Sum of torus distances over pairs.
    pub weight: usize,
    /// False when the greedy fallback was used.
    pub exact: bool,
}

impl Matching {
    /// `(−1)^{|chain ∩ L|}`.
    pub fn correction_sign(&self, logical: &LogicalOperator) -> i8 {
        let crossings = self.chain.iter().filter(|e| logical.support.contains(e)).count();
        if crossings % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

fn exact_pairs(anyons: &[usize], dist: &dyn Fn(usize, usize) -> usize) -> Vec<(usize, usize)> {
    let n = anyons.len();
    let full = (1usize << n) - 1;
    // best[mask]: minimum weight pairing of the anyons in `mask`
    let mut best = vec![usize::MAX; 1 << n];
    let mut choice = vec![(0usize, 0usize); 1 << n];
    best[0] = 0;
    for mask in 1..=full {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut m = rest;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            let sub = rest & !(1 << j);
            if best[sub] != usize::MAX {
                let w = best[sub] + dist(anyons[i], anyons[j]);
                if w < best[mask] {
                    best[mask] = w;
                    choice[mask] = (i, j);
                }
            }
        }
    }
    let mut pairs = Vec::with_capacity(n / 2);
    let mut mask = full;
    while mask != 0 {
        let (i, j) = choice[mask];
        pairs.push((anyons[i], anyons[j]));
        mask &= !(1 << i | 1 << j);
    }
    pairs
}

fn greedy_pairs(anyons: &[usize], dist: &dyn Fn(usize, usize) -> usize) -> Vec<(usize, usize)> {
    let mut left: Vec<usize> = anyons.to_vec();
    let mut pairs = Vec::with_capacity(left.len() / 2);
    while left.len() >= 2 {
        let mut best = (usize::MAX, 0, 0);
        for a in 0..left.len() {
            for b in a + 1..left.len() {
                let d = dist(left[a], left[b]);
                if d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        let (_, a, b) = best;
        pairs.push((left[a], left[b]));
        left.remove(b);
        left.remove(a);
    }
    pairs
}

/// Minimum-weight pairing of the flagged checks under the torus metric,
/// exact up to [`EXACT_MATCHING_LIMIT`] anyons and greedy nearest-pair above.
pub fn decode_matching(syndrome: &SyndromeConfig, lattice: &TorusLattice) -> Result<Matching> {
    if syndrome.flags().len() != lattice.n_cells() {
        return Err(Error::domain("syndrome", "length does not match the lattice"));
    }
    let anyons = syndrome.anyons();
    if anyons.len() % 2 == 1 {
        return Err(Error::Decoding(format!("odd syndrome with {} anyons", anyons.len())));
    }
    let dist = |a: usize, b: usize| lattice.cell_distance(a, b);
    let exact = anyons.len() <= EXACT_MATCHING_LIMIT;
    let pairs = if exact { exact_pairs(&anyons, &dist) } else { greedy_pairs(&anyons, &dist) };
    let mut chain = Vec::new();
    let mut weight = 0;
    for &(a, b) in &pairs {
        weight += dist(a, b);
        chain.extend(lattice.correction_path(syndrome.sector, a, b));
    }
    Ok(Matching { pairs, chain, weight, exact })
}
