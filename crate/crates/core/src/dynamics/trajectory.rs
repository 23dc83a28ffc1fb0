use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::KmcEngine;
use super::equilibrium::{class_rates_at, default_burn_in, sample_equilibrium, StartKind};
use super::observable::SignObservable;
use crate::davies::{DaviesRateTable, FlipModel};
use crate::error::{Error, Result};
use crate::lattice::SpinConfig;

/// Initial condition of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartMode {
    /// All spins +1 (a ground state of every supported model).
    Ordered,
    Config(Vec<i8>),
    Equilibrium,
}

#[derive(Debug, Clone)]
pub struct KmcConfig {
    pub model: FlipModel,
    pub rates: DaviesRateTable,
    pub t_max: f64,
    pub sample_interval: f64,
    pub seed: u64,
    /// Stream index within the seed; see [`trajectory_rng`].
    pub stream: u64,
    pub start: StartMode,
    /// Burn-in length for annealed equilibrium starts, in flips per site at
    /// the largest rate.
    pub burn_in: Option<f64>,
}

impl KmcConfig {
    pub fn new(model: FlipModel, rates: DaviesRateTable, t_max: f64, sample_interval: f64, seed: u64) -> Self {
        Self { model, rates, t_max, sample_interval, seed, stream: 0, start: StartMode::Ordered, burn_in: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::domain("t_max", format!("must be finite and > 0, got {}", self.t_max)));
        }
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return Err(Error::domain("sample_interval", format!("must be finite and > 0, got {}", self.sample_interval)));
        }
        let db = self.rates.detailed_balance_residual();
        if db > 1e-10 {
            return Err(Error::domain("rates", format!("table violates detailed balance (residual {db:.3e})")));
        }
        if let StartMode::Config(c) = &self.start {
            if c.len() != self.model.n_sites() || c.iter().any(|&s| s != 1 && s != -1) {
                return Err(Error::domain("start", "configuration must have one ±1 entry per site"));
            }
        }
        if let Some(b) = self.burn_in {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::domain("burn_in", "must be finite and ≥ 0"));
            }
        }
        self.model.flip_rates(&self.rates)?;
        Ok(())
    }

    /// Sample times 0, Δ, 2Δ, … ≤ t_max.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_max / self.sample_interval * (1.0 + 1e-12)).floor() as usize;
        (0..=n).map(|k| k as f64 * self.sample_interval).collect()
    }
}

/// Per-trajectory generator: ChaCha8 keyed by `seed`, on stream `stream`.
pub fn trajectory_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub stream: u64,
    pub start: StartKind,
    pub names: Vec<String>,
    pub times: Vec<f64>,
    /// `series[o][k]`: observable `o` at `times[k]`.
    pub series: Vec<Vec<i8>>,
    pub final_config: SpinConfig,
    pub events: u64,
}

pub fn run_trajectory(config: &KmcConfig, observables: &[&dyn SignObservable]) -> Result<Trajectory> {
    config.validate()?;
    let mut rng = trajectory_rng(config.seed, config.stream);
    let n = config.model.n_sites();
    let (spins, start) = match &config.start {
        StartMode::Ordered => (vec![1; n], StartKind::Ordered),
        StartMode::Config(c) => (c.clone(), StartKind::Given),
        StartMode::Equilibrium => {
            let sweeps = config.burn_in.unwrap_or_else(|| default_burn_in(&config.model));
            sample_equilibrium(&config.model, &config.rates, sweeps, &mut rng)?
        }
    };
    let rates = class_rates_at(&config.model, &config.rates, config.rates.beta)?;
    let mut engine = KmcEngine::new(&config.model, rates, spins);
    let times = config.sample_times();
    let mut series = vec![Vec::with_capacity(times.len()); observables.len()];
    for &t in &times {
        engine.advance_to(t, &mut rng);
        for (s, o) in series.iter_mut().zip(observables) {
            s.push(o.evaluate(engine.spins()));
        }
    }
    Ok(Trajectory {
        seed: config.seed,
        stream: config.stream,
        start,
        names: observables.iter().map(|o| o.name()).collect(),
        times,
        series,
        final_config: SpinConfig::from_values(engine.spins().to_vec())?,
        events: engine.events(),
    })
}

/// `count` independent trajectories on streams `config.stream + i`, run in
/// parallel; the result does not depend on the thread count.
pub fn run_ensemble(config: &KmcConfig, observables: &[&dyn SignObservable], count: usize) -> Result<Vec<Trajectory>> {
    config.validate()?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut c = config.clone();
            c.stream = config.stream + i;
            run_trajectory(&c, observables)
        })
        .collect()
}
