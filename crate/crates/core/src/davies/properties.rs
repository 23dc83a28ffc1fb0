use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checks::check_db_stationarity;
use super::expm::{total_variation, DenseSemigroup};
use super::kitaev::AnyonChain;
use super::{build_classical_generator, build_rates, FlipModel, GeneratorMatrix};
use crate::bath::SpectralDensityModel;
use crate::error::{Error, Result};
use crate::lattice::{IsingLattice, Sector, TorusLattice};

/// Settings for [`davies_properties`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropertiesConfig {
    pub ising_sizes: Vec<usize>,
    /// L = 2 uses the full edge-configuration generator; larger L use the
    /// anyon (syndrome) chain.
    pub kitaev_sizes: Vec<usize>,
    pub betas: Vec<f64>,
    pub coupling: f64,
    pub lambda2: f64,
    pub amplitude: f64,
    pub cutoff: f64,
    pub n_initial: usize,
    /// Relaxation time in units of 1/gap.
    pub relax_factor: f64,
    pub tv_tolerance: f64,
    pub residual_tolerance: f64,
    pub negativity_tolerance: f64,
    pub seed: u64,
}

impl Default for PropertiesConfig {
    fn default() -> Self {
        Self {
            ising_sizes: (3..=8).collect(),
            kitaev_sizes: vec![2, 3],
            betas: vec![0.0, 0.5, 1.0],
            coupling: 1.0,
            lambda2: 1.0,
            amplitude: 1.0,
            cutoff: 10.0,
            n_initial: 20,
            relax_factor: 50.0,
            tv_tolerance: 1e-3,
            residual_tolerance: 1e-10,
            negativity_tolerance: 1e-9,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertiesRow {
    pub system: String,
    pub size: usize,
    pub beta: f64,
    pub states: usize,
    pub stationarity_residual: f64,
    pub detailed_balance_residual: f64,
    pub self_adjointness_residual: f64,
    pub column_sum_residual: f64,
    /// Smallest eigenvalue of the symmetrized −𝓛*.
    pub min_eigenvalue: f64,
    pub zero_multiplicity: usize,
    pub gap: f64,
    pub relax_time: f64,
    pub max_tv: f64,
    pub d1: bool,
    pub d2: bool,
    pub d3: bool,
    pub d4: bool,
}

impl PropertiesRow {
    pub fn passes(&self) -> bool {
        self.d1 && self.d2 && self.d3 && self.d4
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertiesReport {
    pub rows: Vec<PropertiesRow>,
    pub all_pass: bool,
}

fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // exponential weights give a uniform draw from the simplex
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn check_generator(
    system: &str,
    size: usize,
    gen: &GeneratorMatrix,
    cfg: &PropertiesConfig,
    rng: &mut ChaCha8Rng,
) -> Result<PropertiesRow> {
    let db = check_db_stationarity(gen);
    let semigroup = DenseSemigroup::new(gen)?;
    let values = semigroup.eigenvalues();
    let scale = gen.symmetrized().norm_bound().max(1.0);
    let zero = 1e-9 * scale;
    let zero_multiplicity = values.iter().filter(|v| v.abs() <= zero).count();
    let gap = values.iter().copied().find(|&v| v > zero).unwrap_or(f64::NAN);
    let relax_time = cfg.relax_factor / gap;
    let mut max_tv: f64 = 0.0;
    for _ in 0..cfg.n_initial {
        let p = random_distribution(rng, gen.dim());
        let q = semigroup.evolve_distribution(&p, relax_time);
        max_tv = max_tv.max(total_variation(&q, gen.gibbs()));
    }
    let tol = cfg.residual_tolerance;
    Ok(PropertiesRow {
        system: system.to_string(),
        size,
        beta: gen.beta,
        states: gen.dim(),
        stationarity_residual: db.stationarity_residual,
        detailed_balance_residual: db.detailed_balance_residual,
        self_adjointness_residual: db.self_adjointness_residual,
        column_sum_residual: db.column_sum_residual,
        min_eigenvalue: values[0],
        zero_multiplicity,
        gap,
        relax_time,
        max_tv,
        d1: db.stationarity_residual < tol && db.column_sum_residual < tol,
        d2: zero_multiplicity == 1 && gap > 0.0 && max_tv <= cfg.tv_tolerance,
        d3: db.detailed_balance_residual < tol && db.self_adjointness_residual < tol,
        d4: values[0] >= -cfg.negativity_tolerance,
    })
}

/// Checks stationarity, relaxation, detailed balance and negativity on every
/// configured system and temperature.
pub fn davies_properties(cfg: &PropertiesConfig) -> Result<PropertiesReport> {
    if cfg.n_initial == 0 {
        return Err(Error::domain("n_initial", "must be ≥ 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for &beta in &cfg.betas {
        let bath = SpectralDensityModel::flat_kms(cfg.amplitude, cfg.cutoff, beta)?;
        for &n in &cfg.ising_sizes {
            let m = FlipModel::ising(IsingLattice::ring(n)?, cfg.coupling)?;
            let rates = build_rates(&bath, &m.bohr_frequencies(), cfg.lambda2)?;
            rows.push(check_generator("ising_1d", n, &build_classical_generator(&m, &rates)?, cfg, &mut rng)?);
        }
        for &l in &cfg.kitaev_sizes {
            let m = FlipModel::kitaev(TorusLattice::new(l)?, Sector::Zlike, cfg.coupling)?;
            let rates = build_rates(&bath, &m.bohr_frequencies(), cfg.lambda2)?;
            let row = if l == 2 {
                check_generator("kitaev_sector", l, &build_classical_generator(&m, &rates)?, cfg, &mut rng)?
            } else {
                let chain = AnyonChain::new(&m, &rates)?;
                check_generator("kitaev_anyon_chain", l, &chain.generator()?, cfg, &mut rng)?
            };
            rows.push(row);
        }
    }
    let all_pass = rows.iter().all(PropertiesRow::passes);
    Ok(PropertiesReport { rows, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let cfg = PropertiesConfig { ising_sizes: vec![3, 4], kitaev_sizes: vec![2], betas: vec![0.0, 1.0], ..Default::default() };
        let r = davies_properties(&cfg).unwrap();
        assert_eq!(r.rows.len(), 6);
        for row in &r.rows {
            assert!(row.passes(), "{row:?}");
        }
        assert!(r.all_pass);
    }

    #[test]
    fn simplex_draws_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_distribution(&mut rng, 50);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(p.iter().all(|&x| x >= 0.0));
    }
}
