//! Kinetic Monte Carlo for single-flip Davies dynamics, equilibrium
//! sampling, autocorrelation estimates and decay-rate fits.

mod autocorr;
mod engine;
mod equilibrium;
mod fit;
mod observable;
mod record;
mod trajectory;

pub use autocorr::{
    estimate_autocorrelation, AutocorrelationEstimate, AutocorrelationMode, AutocorrelationOptions, MIN_TRAJECTORIES,
};
pub use engine::KmcEngine;
pub use equilibrium::{class_rates_at, default_burn_in, sample_equilibrium, sample_ring, StartKind, ANNEAL_STAGES};
pub use fit::{fit_decay_rate, fit_decay_series, DecayFit, NONEXPONENTIAL_RESIDUAL};
pub use observable::{ObservableSpec, SignObservable};
pub(crate) use observable::majority;
pub use record::{read_records, write_trajectory_csv, RecordHeader, RecordWriter};
pub use trajectory::{run_ensemble, run_trajectory, trajectory_rng, KmcConfig, StartMode, Trajectory};
