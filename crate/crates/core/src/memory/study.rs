use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dressed::{Decoder, DressedObservable};
use crate::bath::SpectralDensityModel;
use crate::davies::{build_rates, FlipModel};
use crate::dynamics::{
    estimate_autocorrelation, fit_decay_rate, run_ensemble, AutocorrelationEstimate, AutocorrelationMode,
    AutocorrelationOptions, KmcConfig, ObservableSpec, SignObservable, StartMode,
};
use crate::error::{Error, Result};
use crate::lattice::{HomologyLabel, IsingLattice, LogicalOperator, Sector, TorusLattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyModel {
    Ising1d,
    Ising2d,
    KitaevSector,
}

impl StudyModel {
    fn label(self) -> &'static str {
        match self {
            Self::Ising1d => "ising_1d",
            Self::Ising2d => "ising_2d",
            Self::KitaevSector => "kitaev_sector",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    Bare,
    Dressed,
}

/// A grid of sizes × temperatures × observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifetimePlan {
    pub model: StudyModel,
    pub sizes: Vec<usize>,
    pub betas: Vec<f64>,
    pub observables: Vec<ObservableKind>,
    /// Energy scale J.
    pub coupling: f64,
    /// System–bath coupling λ².
    pub lambda2: f64,
    /// FlatKMS amplitude R.
    pub amplitude: f64,
    /// FlatKMS cutoff Ω.
    pub cutoff: f64,
    pub n_trajectories: usize,
    /// Samples per trajectory.
    pub samples: usize,
    /// Largest autocorrelation lag as a fraction of the trajectory, in
    /// equilibrium mode. Long trajectories give many time origins.
    pub lag_fraction: f64,
    /// First trajectory length; multiplied by `growth` until the slowest
    /// observable has decayed below `window.0` or `t_limit` is reached.
    pub t_initial: f64,
    pub t_limit: f64,
    pub growth: f64,
    pub mode: AutocorrelationMode,
    /// Fit window as fractions of C(0): lags with `lo ≤ C/C(0) ≤ hi`.
    pub window: (f64, f64),
    /// Burn-in for annealed starts, in flips per site at the largest rate.
    pub burn_in: Option<f64>,
    pub seed: u64,
}

impl Default for LifetimePlan {
    fn default() -> Self {
        Self {
            model: StudyModel::Ising2d,
            sizes: vec![4, 6, 8],
            betas: vec![0.6],
            observables: vec![ObservableKind::Bare, ObservableKind::Dressed],
            coupling: 1.0,
            lambda2: 1.0,
            amplitude: 1.0,
            cutoff: 10.0,
            n_trajectories: 64,
            samples: 1000,
            lag_fraction: 0.1,
            t_initial: 20.0,
            t_limit: 1e6,
            growth: 4.0,
            mode: AutocorrelationMode::EquilibriumEnsemble,
            window: (0.1, 0.6),
            burn_in: None,
            seed: 1,
        }
    }
}

impl LifetimePlan {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("sizes", "must be nonempty and strictly increasing"));
        }
        if self.betas.is_empty() || self.betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::domain("betas", "must be nonempty, finite and ≥ 0"));
        }
        if self.observables.is_empty() {
            return Err(Error::domain("observables", "must be nonempty"));
        }
        if self.n_trajectories < crate::dynamics::MIN_TRAJECTORIES {
            return Err(Error::domain(
                "n_trajectories",
                format!("must be ≥ {}", crate::dynamics::MIN_TRAJECTORIES),
            ));
        }
        if self.samples < 10 {
            return Err(Error::domain("samples", "must be ≥ 10"));
        }
        if !(self.lag_fraction > 0.0 && self.lag_fraction <= 0.5) || ((self.samples as f64 * self.lag_fraction) as usize) < 5 {
            return Err(Error::domain("lag_fraction", "must be in (0, 0.5] and give at least 5 lags"));
        }
        if !(self.t_initial > 0.0 && self.t_limit >= self.t_initial && self.growth > 1.0) {
            return Err(Error::domain("t_initial", "need 0 < t_initial ≤ t_limit and growth > 1"));
        }
        let (lo, hi) = self.window;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::domain("window", "need 0 < lo < hi < 1"));
        }
        for (k, v) in [("coupling", self.coupling), ("lambda2", self.lambda2), ("amplitude", self.amplitude), ("cutoff", self.cutoff)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(k, "must be finite and > 0"));
            }
        }
        Ok(())
    }

    pub fn decoder(&self) -> Decoder {
        match self.model {
            StudyModel::KitaevSector => Decoder::MinWeightMatching,
            _ => Decoder::MajorityVote,
        }
    }

    fn flip_model(&self, size: usize) -> Result<FlipModel> {
        match self.model {
            StudyModel::Ising1d => FlipModel::ising(IsingLattice::ring(size)?, self.coupling),
            StudyModel::Ising2d => FlipModel::ising(IsingLattice::square(size)?, self.coupling),
            StudyModel::KitaevSector => FlipModel::kitaev(TorusLattice::new(size)?, Sector::Zlike, self.coupling),
        }
    }

    fn observables(&self, size: usize) -> Result<Vec<(ObservableKind, Box<dyn SignObservable>)>> {
        let mut out: Vec<(ObservableKind, Box<dyn SignObservable>)> = Vec::new();
        for &kind in &self.observables {
            let obs: Box<dyn SignObservable> = match (self.model, kind) {
                (StudyModel::KitaevSector, ObservableKind::Bare) => {
                    let lat = TorusLattice::new(size)?;
                    Box::new(ObservableSpec::bare_logical(&LogicalOperator::canonical(&lat, Sector::Zlike, HomologyLabel::Horizontal)))
                }
                (StudyModel::KitaevSector, ObservableKind::Dressed) => {
                    let lat = TorusLattice::new(size)?;
                    let z = LogicalOperator::canonical(&lat, Sector::Zlike, HomologyLabel::Horizontal);
                    Box::new(DressedObservable::kitaev(lat, z))
                }
                (_, ObservableKind::Bare) => Box::new(ObservableSpec::Site { site: 0 }),
                (_, ObservableKind::Dressed) => Box::new(DressedObservable::ising_majority(0)),
            };
            out.push((kind, obs));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LifetimeRow {
    pub model: String,
    pub size: usize,
    pub beta: f64,
    pub observable: ObservableKind,
    pub decoder: String,
    pub gamma: f64,
    pub stderr: f64,
    pub mode: AutocorrelationMode,
    pub t_max: f64,
    pub sample_interval: f64,
    pub n_trajectories: usize,
    pub window: (f64, f64),
    pub nonexponential: bool,
    /// −ln(C(Δ)/C(0))/Δ at the first lag.
    pub short_time_rate: f64,
    /// The slowest observable had not decayed to the window floor by `t_limit`.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LifetimeReport {
    pub plan: LifetimePlan,
    pub rows: Vec<LifetimeRow>,
    pub estimates: Vec<AutocorrelationEstimate>,
}

/// Fit window for an estimate: lags with `lo ≤ C/C(0) ≤ hi` and C above
/// three standard errors, taken from the first contiguous run.
pub fn fit_window(est: &AutocorrelationEstimate, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let c0 = est.values[0];
    let ok = |k: usize| {
        let r = est.values[k] / c0;
        r >= lo && r <= hi && est.values[k] > 3.0 * est.stderr[k]
    };
    let start = (0..est.values.len()).find(|&k| ok(k))?;
    let mut end = start;
    while end + 1 < est.values.len() && ok(end + 1) {
        end += 1;
    }
    (end >= start + 2).then(|| (est.lags[start], est.lags[end]))
}

/// Fallback for runs that hit `t_limit` before decaying: every lag from 1
/// on whose value is above three standard errors.
fn tail_window(est: &AutocorrelationEstimate) -> Option<(f64, f64)> {
    let end = (1..est.values.len()).take_while(|&k| est.values[k] > 3.0 * est.stderr[k]).last()?;
    (end >= 3).then(|| (est.lags[1], est.lags[end]))
}

/// Runs every cell of the plan and fits a decay rate per observable.
pub fn lifetime_study(plan: &LifetimePlan) -> Result<LifetimeReport> {
    plan.validate()?;
    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    let decoder = match plan.decoder() {
        Decoder::MajorityVote => "majority_vote",
        Decoder::MinWeightMatching => "min_weight_matching",
    };
    for (bi, &beta) in plan.betas.iter().enumerate() {
        let bath = SpectralDensityModel::flat_kms(plan.amplitude, plan.cutoff, beta)?;
        for (si, &size) in plan.sizes.iter().enumerate() {
            let model = plan.flip_model(size)?;
            let table = build_rates(&bath, &model.bohr_frequencies(), plan.lambda2)?;
            let obs = plan.observables(size)?;
            let refs: Vec<&dyn SignObservable> = obs.iter().map(|(_, o)| o.as_ref()).collect();
            let mut t_max = plan.t_initial;
            let max_lag = match plan.mode {
                AutocorrelationMode::EquilibriumEnsemble => (plan.samples as f64 * plan.lag_fraction) as usize,
                AutocorrelationMode::RelaxationFromOrdered => plan.samples,
            };
            let cell_seed = plan.seed ^ ((bi as u64) << 40) ^ ((si as u64) << 20);
            let (ests, truncated) = loop {
                let mut cfg = KmcConfig::new(model.clone(), table.clone(), t_max, t_max / plan.samples as f64, cell_seed);
                cfg.start = match plan.mode {
                    AutocorrelationMode::EquilibriumEnsemble => StartMode::Equilibrium,
                    AutocorrelationMode::RelaxationFromOrdered => StartMode::Ordered,
                };
                cfg.burn_in = plan.burn_in;
                let trajs = run_ensemble(&cfg, &refs, plan.n_trajectories)?;
                let opts = AutocorrelationOptions { max_lag, origin_spacing: None };
                let ests = (0..refs.len())
                    .map(|o| estimate_autocorrelation(&trajs, o, plan.mode, opts))
                    .collect::<Result<Vec<_>>>()?;
                let decayed = ests.iter().all(|e| e.values[max_lag] < plan.window.0 * e.values[0]);
                if decayed {
                    break (ests, false);
                }
                if t_max >= plan.t_limit {
                    break (ests, true);
                }
                t_max = (t_max * plan.growth).min(plan.t_limit);
            };
            for ((kind, _), est) in obs.iter().zip(&ests) {
                let window = fit_window(est, plan.window.0, plan.window.1)
                    .or_else(|| if truncated { tail_window(est) } else { None })
                    .ok_or_else(|| Error::Window(format!("{} at size {size}, β = {beta}: no usable fit window", est.observable)))?;
                let fit = fit_decay_rate(est, window)?;
                let dt = est.lags[1];
                rows.push(LifetimeRow {
                    model: plan.model.label().into(),
                    size,
                    beta,
                    observable: *kind,
                    decoder: if *kind == ObservableKind::Dressed { decoder.into() } else { "none".into() },
                    gamma: fit.gamma,
                    stderr: fit.stderr,
                    mode: plan.mode,
                    t_max,
                    sample_interval: dt,
                    n_trajectories: plan.n_trajectories,
                    window,
                    nonexponential: fit.nonexponential,
                    short_time_rate: -(est.values[1] / est.values[0]).ln() / dt,
                    truncated,
                });
            }
            estimates.extend(ests);
        }
    }
    Ok(LifetimeReport { plan: plan.clone(), rows, estimates })
}

fn mode_label(m: AutocorrelationMode) -> &'static str {
    match m {
        AutocorrelationMode::EquilibriumEnsemble => "equilibrium_ensemble",
        AutocorrelationMode::RelaxationFromOrdered => "relaxation_from_ordered",
    }
}

fn kind_label(k: ObservableKind) -> &'static str {
    match k {
        ObservableKind::Bare => "bare",
        ObservableKind::Dressed => "dressed",
    }
}

impl LifetimeReport {
    /// Columns: model, N_or_L, beta, observable, decoder, gamma, stderr, mode.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["model", "N_or_L", "beta", "observable", "decoder", "gamma", "stderr", "mode"])?;
        for r in &self.rows {
            out.write_record([
                r.model.clone(),
                r.size.to_string(),
                r.beta.to_string(),
                kind_label(r.observable).into(),
                r.decoder.clone(),
                format!("{:.10e}", r.gamma),
                format!("{:.10e}", r.stderr),
                mode_label(r.mode).into(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One gnuplot data block per (β, observable): `size gamma stderr`.
    pub fn write_gnuplot<W: Write>(&self, mut w: W) -> Result<()> {
        for &beta in &self.plan.betas {
            for &kind in &self.plan.observables {
                writeln!(w, "# {} beta={} observable={}", self.plan.model.label(), beta, kind_label(kind))?;
                writeln!(w, "# size gamma stderr")?;
                for r in self.rows.iter().filter(|r| r.beta == beta && r.observable == kind) {
                    writeln!(w, "{} {:.10e} {:.10e}", r.size, r.gamma, r.stderr)?;
                }
                writeln!(w)?;
                writeln!(w)?;
            }
        }
        Ok(())
    }
}
