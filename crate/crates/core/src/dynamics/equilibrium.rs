use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::engine::KmcEngine;
use crate::davies::{DaviesRateTable, FlipModel, SpinSystem};
use crate::error::{Error, Result};
use crate::lattice::{HomologyLabel, LogicalOperator, SpinConfig};

/// How an initial configuration was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Ordered,
    Given,
    /// Exact sampling: transfer matrix (ring) or syndrome sampling (toric code).
    EquilibriumExact,
    /// β-annealed burn-in followed by symmetrization.
    EquilibriumBurnIn,
}

impl StartKind {
    pub fn is_equilibrium(self) -> bool {
        matches!(self, Self::EquilibriumExact | Self::EquilibriumBurnIn)
    }
}

/// Number of β stages in the annealed burn-in.
pub const ANNEAL_STAGES: usize = 10;

/// Flip rates per class at inverse temperature `beta`, obtained from the
/// table's downhill and zero-frequency entries by detailed balance.
pub fn class_rates_at(model: &FlipModel, table: &DaviesRateTable, beta: f64) -> Result<Vec<f64>> {
    model
        .classes()
        .iter()
        .map(|&k| {
            let de = model.delta_energy(k);
            if de <= 0.0 {
                table.rate(-de)
            } else {
                table.rate(de).map(|r| if beta.is_infinite() { 0.0 } else { r * (-beta * de).exp() })
            }
            .ok_or_else(|| Error::domain("rates", format!("rate table has no entry for ΔE = {de}")))
        })
        .collect()
}

/// Exact Gibbs sample of a periodic Ising ring by sequential conditioning on
/// the transfer matrix `T = [[e^{βJ}, e^{−βJ}], [e^{−βJ}, e^{βJ}]]`.
///
/// With `r = tanh(βJ)`, `(T^m)_{ab} ∝ (1 + ab·r^m)/2`.
pub fn sample_ring(n: usize, beta_j: f64, rng: &mut ChaCha8Rng) -> Vec<i8> {
    let r = beta_j.tanh();
    let power = |m: usize, same: bool| {
        let rm = r.powi(m as i32);
        if same {
            0.5 * (1.0 + rm)
        } else {
            0.5 * (1.0 - rm)
        }
    };
    let mut spins = vec![1i8; n];
    if rng.random::<f64>() < 0.5 {
        spins[0] = -1;
    }
    for i in 1..n {
        let prev = spins[i - 1];
        // weight of s_i = prev vs −prev, given the ring closes back on s_0
        let rest = n - i;
        let w_same = power(1, true) * power(rest, prev == spins[0]);
        let w_diff = power(1, false) * power(rest, prev != spins[0]);
        let total = w_same + w_diff;
        spins[i] = if rng.random::<f64>() * total < w_same { prev } else { -prev };
    }
    spins
}

/// Exact Gibbs sample of one toric-code sector: independent check values
/// conditioned on even parity, a correction realising that syndrome, then a
/// uniformly random element of the check-preserving group (stars of the other
/// type and both conjugate logicals).
fn sample_toric(model: &FlipModel, beta: f64, rng: &mut ChaCha8Rng) -> Result<Vec<i8>> {
    let SpinSystem::KitaevSector { lattice, sector } = &model.system else {
        unreachable!()
    };
    let n_cells = lattice.n_cells();
    let p_excited = if beta.is_infinite() { 0.0 } else { 1.0 / (1.0 + (2.0 * beta * model.coupling).exp()) };
    // sequential sampling with the parity constraint: P(parity of the rest)
    let q = 1.0 - 2.0 * p_excited;
    let mut flags = vec![false; n_cells];
    let mut parity = false;
    for (c, flag) in flags.iter_mut().enumerate() {
        let rest = (n_cells - c - 1) as i32;
        let even_rest = 0.5 * (1.0 + q.powi(rest));
        let odd_rest = 0.5 * (1.0 - q.powi(rest));
        // the final parity must come out even
        let w_on = p_excited * if parity { even_rest } else { odd_rest };
        let w_off = (1.0 - p_excited) * if parity { odd_rest } else { even_rest };
        *flag = rng.random::<f64>() * (w_on + w_off) < w_on;
        parity ^= *flag;
    }
    let anyons: Vec<usize> = (0..n_cells).filter(|&c| flags[c]).collect();
    let mut config = SpinConfig::all_up(lattice.n_edges());
    for pair in anyons.chunks(2) {
        config.apply_chain(&lattice.correction_path(*sector, pair[0], pair[1]));
    }
    for c in 0..n_cells {
        if rng.random::<bool>() {
            config.apply_chain(&lattice.check(sector.other(), c));
        }
    }
    for label in [HomologyLabel::Horizontal, HomologyLabel::Vertical] {
        if rng.random::<bool>() {
            config.apply_chain(&LogicalOperator::canonical(lattice, sector.other(), label).support);
        }
    }
    Ok(config.values().to_vec())
}

/// Equilibrium starting configuration at the table's β.
///
/// Rings and toric-code sectors are sampled exactly. Square Ising lattices
/// start uniformly random, burn in for the time in which a site flipping at
/// the largest rate would flip `sweeps_per_site` times, with β raised linearly over [`ANNEAL_STAGES`] stages, and are then flipped
/// globally with probability ½.
pub fn sample_equilibrium(
    model: &FlipModel,
    table: &DaviesRateTable,
    sweeps_per_site: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<i8>, StartKind)> {
    let beta = table.beta;
    match &model.system {
        SpinSystem::Ising { lattice } if lattice.dimension() == 1 => {
            Ok((sample_ring(lattice.n_sites(), beta * model.coupling, rng), StartKind::EquilibriumExact))
        }
        SpinSystem::KitaevSector { .. } => Ok((sample_toric(model, beta, rng)?, StartKind::EquilibriumExact)),
        SpinSystem::Ising { lattice } => {
            if !beta.is_finite() {
                return Err(Error::domain("beta", "annealed burn-in needs finite β"));
            }
            let n = lattice.n_sites();
            let spins: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let mut engine = KmcEngine::new(model, class_rates_at(model, table, 0.0)?, spins);
            // stopping at a fixed event count would sample the jump chain,
            // so each stage runs for a fixed time instead
            let max_rate = table.max_rate();
            let stage = sweeps_per_site / max_rate / ANNEAL_STAGES as f64;
            for s in 1..=ANNEAL_STAGES {
                engine.set_class_rates(class_rates_at(model, table, beta * s as f64 / ANNEAL_STAGES as f64)?);
                engine.advance_to(stage * s as f64, rng);
            }
            let mut spins = engine.spins().to_vec();
            if rng.random::<bool>() {
                spins.iter_mut().for_each(|s| *s = -*s);
            }
            Ok((spins, StartKind::EquilibriumBurnIn))
        }
    }
}

/// Default burn-in length for square lattices: 100·L² flips per site at the
/// largest rate.
pub fn default_burn_in(model: &FlipModel) -> f64 {
    match &model.system {
        SpinSystem::Ising { lattice } => 100.0 * (lattice.size() * lattice.size()) as f64,
        SpinSystem::KitaevSector { lattice, .. } => 100.0 * (lattice.size() * lattice.size()) as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::SpectralDensityModel;
    use crate::davies::{build_classical_generator, build_rates, total_variation};
    use crate::lattice::{IsingLattice, Sector, TorusLattice};
    use rand::SeedableRng;

    fn empirical(model: &FlipModel, beta: f64, draws: usize, seed: u64, sweeps: f64) -> (Vec<f64>, Vec<f64>) {
        let bath = SpectralDensityModel::flat_kms(1.0, 10.0, beta).unwrap();
        let table = build_rates(&bath, &model.bohr_frequencies(), 1.0).unwrap();
        let gen = build_classical_generator(model, &table).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0.0; gen.dim()];
        for _ in 0..draws {
            let (s, _) = sample_equilibrium(model, &table, sweeps, &mut rng).unwrap();
            counts[SpinConfig::from_values(s).unwrap().to_bits() as usize] += 1.0 / draws as f64;
        }
        (counts, gen.gibbs().to_vec())
    }

    #[test]
    fn ring_sampler_is_gibbs() {
        let m = FlipModel::ising(IsingLattice::ring(5).unwrap(), 1.0).unwrap();
        let (p, g) = empirical(&m, 0.7, 200_000, 1, 20.0);
        assert!(total_variation(&p, &g) < 0.01, "{}", total_variation(&p, &g));
    }

    #[test]
    fn toric_sampler_is_gibbs() {
        let m = FlipModel::kitaev(TorusLattice::new(2).unwrap(), Sector::Zlike, 1.0).unwrap();
        let (p, g) = empirical(&m, 0.4, 200_000, 2, 20.0);
        assert!(total_variation(&p, &g) < 0.02, "{}", total_variation(&p, &g));
    }

    #[test]
    fn annealed_square_is_close_to_gibbs() {
        let m = FlipModel::ising(IsingLattice::square(3).unwrap(), 1.0).unwrap();
        let (p, g) = empirical(&m, 0.3, 40_000, 3, 20.0);
        assert!(total_variation(&p, &g) < 0.06, "{}", total_variation(&p, &g));
    }

    #[test]
    fn zero_temperature_ring_is_uniform_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = sample_ring(7, f64::INFINITY, &mut rng);
        assert!(s.iter().all(|&x| x == s[0]));
    }
}
