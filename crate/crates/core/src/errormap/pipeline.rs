use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::born::{a2_fit, born_error_weights, A2Verdict, ErrorWeightEstimate};
use super::support::{evolve_support, onset_times, ChainModel, PauliAxis, SupportSpectrum};
use crate::bath::{correlation_function, CorrelationFunction, SpectralDensityModel};
use crate::error::{Error, Result};

/// Correlation functions fed to the audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AuditBath {
    /// F(t) = A e^{−a t}.
    Exponential { amplitude: f64, rate: f64 },
    /// Flat KMS density, F(t) by quadrature.
    FlatKms { amplitude: f64, cutoff: f64, beta: f64 },
}

impl AuditBath {
    pub fn name(&self) -> &'static str {
        match self {
            AuditBath::Exponential { .. } => "exponential",
            AuditBath::FlatKms { .. } => "flat_kms",
        }
    }

    pub fn correlation(&self, times: &[f64]) -> Result<CorrelationFunction> {
        match *self {
            AuditBath::Exponential { amplitude, rate } => {
                if !(amplitude.is_finite() && rate > 0.0 && rate.is_finite()) {
                    return Err(Error::domain("rate", "exponential bath needs a finite amplitude and a positive rate"));
                }
                let values = times.iter().map(|&t| Complex64::new(amplitude * (-rate * t).exp(), 0.0)).collect();
                CorrelationFunction::from_samples(times.to_vec(), values)
            }
            AuditBath::FlatKms { amplitude, cutoff, beta } => {
                correlation_function(&SpectralDensityModel::flat_kms(amplitude, cutoff, beta)?, times)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrormapConfig {
    pub chain: ChainModel,
    pub site: usize,
    pub axis: PauliAxis,
    pub t_max: f64,
    pub time_points: usize,
    pub baths: Vec<AuditBath>,
}

impl Default for ErrormapConfig {
    fn default() -> Self {
        ErrormapConfig {
            chain: ChainModel { n_qubits: 8, coupling: 1.0, field: 1.0 },
            site: 0,
            axis: PauliAxis::Z,
            t_max: 3.0,
            time_points: 301,
            baths: vec![
                AuditBath::Exponential { amplitude: 1.0, rate: 4.0 },
                AuditBath::FlatKms { amplitude: 1.0, cutoff: 10.0, beta: 1.0 },
            ],
        }
    }
}

impl ErrormapConfig {
    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        if self.site >= self.chain.n_qubits {
            return Err(Error::domain("site", "must lie on the chain"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::domain("t_max", "must be positive and finite"));
        }
        if self.time_points < 2 {
            return Err(Error::domain("time_points", "need at least 2"));
        }
        if self.baths.is_empty() {
            return Err(Error::domain("baths", "list at least one bath"));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let m = self.time_points - 1;
        (0..=m).map(|i| self.t_max * i as f64 / m as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathVerdict {
    pub bath: AuditBath,
    pub estimate: ErrorWeightEstimate,
    /// `None` when too few sizes carry weight to fit.
    pub verdict: Option<A2Verdict>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrormapReport {
    pub config: ErrormapConfig,
    pub spectra: Vec<SupportSpectrum>,
    /// max_t |Σ_n w_n(t) − 1|.
    pub unitarity_error: f64,
    /// First time w_n exceeds 10⁻³, per n.
    pub onset: Vec<Option<f64>>,
    pub baths: Vec<BathVerdict>,
}

/// Support growth on the chain followed by one A2 fit per bath.
pub fn errormap_audit(cfg: &ErrormapConfig) -> Result<ErrormapReport> {
    cfg.validate()?;
    let times = cfg.times();
    let spectra = evolve_support(&cfg.chain, cfg.site, cfg.axis, &times)?;
    let unitarity_error = spectra.iter().map(|s| (s.total() - 1.0).abs()).fold(0.0, f64::max);
    let onset = onset_times(&spectra, 1e-3);
    let mut baths = Vec::new();
    for bath in &cfg.baths {
        let corr = bath.correlation(&times)?;
        let mut estimate = born_error_weights(&spectra, &corr)?;
        let (verdict, note) = match a2_fit(&estimate) {
            Ok(v) => (Some(v), None),
            Err(e @ Error::InsufficientData { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        estimate.fit = verdict;
        baths.push(BathVerdict { bath: bath.clone(), estimate, verdict, note });
    }
    Ok(ErrormapReport { config: cfg.clone(), spectra, unitarity_error, onset, baths })
}

impl ErrormapReport {
    /// Columns: t, w_1 .. w_N.
    pub fn write_spectra_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let n = self.config.chain.n_qubits;
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|k| format!("w_{k}")));
        out.write_record(&header)?;
        for s in &self.spectra {
            let mut row = vec![format!("{:.10e}", s.time)];
            row.extend(s.weights.iter().map(|w| format!("{w:.10e}")));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Columns: bath, n, m_n.
    pub fn write_weights_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["bath", "n", "m_n"])?;
        for b in &self.baths {
            for (k, m) in b.estimate.magnitudes.iter().enumerate() {
                out.write_record([b.bath.name().to_string(), (k + 1).to_string(), format!("{m:.10e}")])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_pipeline_verdicts() {
        let report = errormap_audit(&ErrormapConfig::default()).unwrap();
        assert!(report.unitarity_error < 1e-10);
        let exp = report.baths[0].verdict.unwrap();
        let flat = report.baths[1].verdict.unwrap();
        assert!(exp.accepted, "{exp:?}");
        assert!(!flat.accepted, "{flat:?}");
        let onset: Vec<f64> = report.onset.iter().flatten().cloned().collect();
        assert!(onset.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn narrow_bath_tracks_single_site() {
        let mut cfg = ErrormapConfig { time_points: 601, ..Default::default() };
        let mut last = f64::INFINITY;
        for rate in [4.0, 8.0, 16.0] {
            cfg.baths = vec![AuditBath::Exponential { amplitude: 1.0, rate }];
            let b = &errormap_audit(&cfg).unwrap().baths[0];
            let v = b.verdict.unwrap();
            assert!(v.accepted, "rate {rate}: {v:?}");
            assert!(v.eta < last);
            last = v.eta;
            let m = &b.estimate.magnitudes;
            assert!(m[0] / m.iter().sum::<f64>() > 0.9);
        }
    }

    #[test]
    fn csv_and_json() {
        let cfg = ErrormapConfig { time_points: 11, chain: ChainModel { n_qubits: 4, coupling: 1.0, field: 0.5 }, ..Default::default() };
        let report = errormap_audit(&cfg).unwrap();
        let mut buf = Vec::new();
        report.write_spectra_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,w_1,w_2,w_3,w_4\n"));
        assert_eq!(text.lines().count(), 12);
        let mut buf = Vec::new();
        report.write_weights_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 9);
        assert!(report.to_json().unwrap().contains("\"unitarity_error\""));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = ErrormapConfig { site: 8, ..Default::default() };
        assert!(errormap_audit(&cfg).unwrap_err().is_validation());
        let cfg = ErrormapConfig { baths: vec![], ..Default::default() };
        assert!(errormap_audit(&cfg).is_err());
    }
}
