use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};

/// Fewest trajectories accepted by [`estimate_autocorrelation`].
pub const MIN_TRAJECTORIES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutocorrelationMode {
    /// ⟨X(t)X(0)⟩ over equilibrium starts and time origins.
    EquilibriumEnsemble,
    /// ⟨X(t)⟩ from the ordered start; a low-temperature proxy.
    RelaxationFromOrdered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutocorrelationOptions {
    /// Largest lag, in samples.
    pub max_lag: usize,
    /// Spacing between time origins, in samples. `None` picks the 1/e lag of
    /// a pilot estimate using every origin.
    pub origin_spacing: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrelationEstimate {
    pub mode: AutocorrelationMode,
    pub observable: String,
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_trajectories: usize,
    pub origin_spacing: usize,
    /// Set for the ordered-start proxy.
    pub proxy: bool,
    sums: Vec<f64>,
    sums_sq: Vec<f64>,
}

fn trajectory_means(series: &[i8], max_lag: usize, spacing: usize, mode: AutocorrelationMode) -> Vec<f64> {
    match mode {
        AutocorrelationMode::RelaxationFromOrdered => series[..=max_lag].iter().map(|&x| x as f64).collect(),
        AutocorrelationMode::EquilibriumEnsemble => (0..=max_lag)
            .map(|lag| {
                let mut acc = 0i64;
                let mut n = 0usize;
                let mut t0 = 0;
                while t0 + lag < series.len() {
                    acc += (series[t0] * series[t0 + lag]) as i64;
                    n += 1;
                    t0 += spacing;
                }
                acc as f64 / n as f64
            })
            .collect(),
    }
}

impl AutocorrelationEstimate {
    fn from_sums(
        mode: AutocorrelationMode,
        observable: String,
        lags: Vec<f64>,
        origin_spacing: usize,
        n: usize,
        sums: Vec<f64>,
        sums_sq: Vec<f64>,
    ) -> Self {
        let nf = n as f64;
        let values: Vec<f64> = sums.iter().map(|s| s / nf).collect();
        let stderr = sums_sq
            .iter()
            .zip(&values)
            .map(|(sq, m)| {
                let var = ((sq / nf - m * m) * nf / (nf - 1.0)).max(0.0);
                (var / nf).sqrt()
            })
            .collect();
        Self {
            mode,
            observable,
            lags,
            values,
            stderr,
            n_trajectories: n,
            origin_spacing,
            proxy: mode == AutocorrelationMode::RelaxationFromOrdered,
            sums,
            sums_sq,
        }
    }

    /// Pools two estimates built on the same lag grid and settings.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.mode != other.mode
            || self.observable != other.observable
            || self.lags != other.lags
            || self.origin_spacing != other.origin_spacing
        {
            return Err(Error::GridMismatch("estimates differ in mode, observable, lags or origin spacing".into()));
        }
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
        Ok(Self::from_sums(
            self.mode,
            self.observable.clone(),
            self.lags.clone(),
            self.origin_spacing,
            self.n_trajectories + other.n_trajectories,
            add(&self.sums, &other.sums),
            add(&self.sums_sq, &other.sums_sq),
        ))
    }
}

pub fn estimate_autocorrelation(
    trajectories: &[Trajectory],
    observable: usize,
    mode: AutocorrelationMode,
    options: AutocorrelationOptions,
) -> Result<AutocorrelationEstimate> {
    if trajectories.len() < MIN_TRAJECTORIES {
        return Err(Error::InsufficientData { what: "trajectories", needed: MIN_TRAJECTORIES, got: trajectories.len() });
    }
    let first = &trajectories[0];
    if observable >= first.series.len() {
        return Err(Error::domain("observable", format!("index {observable} but only {} recorded", first.series.len())));
    }
    for t in trajectories {
        if t.times != first.times || t.names != first.names {
            return Err(Error::GridMismatch("trajectories have different sample times or observables".into()));
        }
        let ok = match mode {
            AutocorrelationMode::EquilibriumEnsemble => t.start.is_equilibrium(),
            AutocorrelationMode::RelaxationFromOrdered => t.start == super::StartKind::Ordered,
        };
        if !ok {
            return Err(Error::Precondition(format!("{mode:?} needs matching starts, found {:?}", t.start)));
        }
    }
    let len = first.times.len();
    if options.max_lag == 0 || options.max_lag >= len {
        return Err(Error::domain("max_lag", format!("must be in 1..{len}, got {}", options.max_lag)));
    }
    let spacing = match options.origin_spacing {
        Some(0) => return Err(Error::domain("origin_spacing", "must be ≥ 1")),
        Some(s) => s,
        None if mode == AutocorrelationMode::RelaxationFromOrdered => 1,
        None => {
            let mut pilot = vec![0.0; options.max_lag + 1];
            for t in trajectories {
                for (p, v) in pilot.iter_mut().zip(trajectory_means(&t.series[observable], options.max_lag, 1, mode)) {
                    *p += v;
                }
            }
            let c0 = pilot[0];
            pilot.iter().position(|&c| c < c0 / std::f64::consts::E).unwrap_or(options.max_lag).max(1)
        }
    };
    let mut sums = vec![0.0; options.max_lag + 1];
    let mut sums_sq = vec![0.0; options.max_lag + 1];
    for t in trajectories {
        for (k, v) in trajectory_means(&t.series[observable], options.max_lag, spacing, mode).into_iter().enumerate() {
            sums[k] += v;
            sums_sq[k] += v * v;
        }
    }
    let t0 = first.times[0];
    let lags = first.times[..=options.max_lag].iter().map(|t| t - t0).collect();
    Ok(AutocorrelationEstimate::from_sums(
        mode,
        first.names[observable].clone(),
        lags,
        spacing,
        trajectories.len(),
        sums,
        sums_sq,
    ))
}
