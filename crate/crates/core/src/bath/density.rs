use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative KMS tolerance applied to tabulated densities.
pub const DEFAULT_TABLE_KMS_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    FlatKms,
    PowerAnsatz,
    Tabulated,
}

/// Construction parameters for [`SpectralDensityModel`].
///
/// Units: hbar = k_B = 1, so `beta` is an inverse temperature in time units
/// and `cutoff` is an angular frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    /// Constant `amplitude` for ω ≥ 0, Boltzmann-suppressed for ω < 0.
    FlatKms { amplitude: f64, cutoff: f64, beta: f64 },
    /// `amplitude · ω^exponent · exp(-ω/cutoff)` for ω ≥ 0, KMS-extended below zero.
    PowerAnsatz {
        amplitude: f64,
        exponent: f64,
        cutoff: f64,
        beta: f64,
    },
    /// Piecewise-linear interpolation of `(ω, R)` samples.
    Tabulated {
        samples: Vec<(f64, f64)>,
        beta: f64,
        #[serde(default = "default_table_tolerance")]
        kms_tolerance: f64,
    },
}

fn default_table_tolerance() -> f64 {
    DEFAULT_TABLE_KMS_TOLERANCE
}

impl DensitySpec {
    pub fn kind(&self) -> DensityKind {
        match self {
            DensitySpec::FlatKms { .. } => DensityKind::FlatKms,
            DensitySpec::PowerAnsatz { .. } => DensityKind::PowerAnsatz,
            DensitySpec::Tabulated { .. } => DensityKind::Tabulated,
        }
    }
}

/// A bath spectral density R(ω) satisfying the KMS condition
/// `R(-ω) = exp(-βω) R(ω)`. It vanishes outside `[-cutoff, cutoff]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDensityModel {
    kind: DensityKind,
    amplitude: f64,
    cutoff: f64,
    beta: f64,
    exponent: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    table: Vec<(f64, f64)>,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::domain("beta", format!("must be >= 0, got {beta}")));
    }
    Ok(())
}

fn check_positive(key: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::domain(key, format!("must be finite and > 0, got {value}")));
    }
    Ok(())
}

/// Builds a validated spectral density from its specification.
pub fn build_spectral_density(spec: &DensitySpec) -> Result<SpectralDensityModel> {
    match spec {
        DensitySpec::FlatKms { amplitude, cutoff, beta } => {
            SpectralDensityModel::flat_kms(*amplitude, *cutoff, *beta)
        }
        DensitySpec::PowerAnsatz { amplitude, exponent, cutoff, beta } => {
            SpectralDensityModel::power_ansatz(*amplitude, *exponent, *cutoff, *beta)
        }
        DensitySpec::Tabulated { samples, beta, kms_tolerance } => {
            SpectralDensityModel::tabulated(samples.clone(), *beta, *kms_tolerance)
        }
    }
}

impl SpectralDensityModel {
    pub fn flat_kms(amplitude: f64, cutoff: f64, beta: f64) -> Result<Self> {
        check_positive("amplitude", amplitude)?;
        check_positive("cutoff", cutoff)?;
        check_beta(beta)?;
        Ok(SpectralDensityModel {
            kind: DensityKind::FlatKms,
            amplitude,
            cutoff,
            beta,
            exponent: 0.0,
            table: Vec::new(),
        })
    }

    pub fn power_ansatz(amplitude: f64, exponent: f64, cutoff: f64, beta: f64) -> Result<Self> {
        check_positive("amplitude", amplitude)?;
        check_positive("cutoff", cutoff)?;
        check_beta(beta)?;
        if !(exponent.is_finite() && exponent >= 1.0) {
            return Err(Error::domain("exponent", format!("must be >= 1, got {exponent}")));
        }
        Ok(SpectralDensityModel {
            kind: DensityKind::PowerAnsatz,
            amplitude,
            cutoff,
            beta,
            exponent,
            table: Vec::new(),
        })
    }

    /// Tabulated density. Samples are sorted by ω; each positive sample ω
    /// must satisfy KMS against the interpolated value at -ω within
    /// `kms_tolerance` (relative).
    pub fn tabulated(mut samples: Vec<(f64, f64)>, beta: f64, kms_tolerance: f64) -> Result<Self> {
        check_beta(beta)?;
        if !(kms_tolerance.is_finite() && kms_tolerance >= 0.0) {
            return Err(Error::domain("kms_tolerance", "must be finite and >= 0"));
        }
        if samples.len() < 2 {
            return Err(Error::domain("samples", "need at least two (ω, R) samples"));
        }
        if samples.iter().any(|&(w, r)| !w.is_finite() || !r.is_finite()) {
            return Err(Error::domain("samples", "non-finite sample"));
        }
        if let Some(&(w, r)) = samples.iter().find(|s| s.1 < 0.0) {
            return Err(Error::domain("samples", format!("negative density R({w}) = {r}")));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.windows(2).any(|p| p[0].0 == p[1].0) {
            return Err(Error::domain("samples", "duplicate frequency"));
        }
        let cutoff = samples
            .iter()
            .map(|s| s.0.abs())
            .fold(0.0_f64, f64::max);
        check_positive("samples", cutoff)?;
        let model = SpectralDensityModel {
            kind: DensityKind::Tabulated,
            amplitude: samples.iter().map(|s| s.1).fold(0.0, f64::max),
            cutoff,
            beta,
            exponent: 0.0,
            table: samples,
        };
        let violation = model.table_kms_violation();
        if violation > kms_tolerance {
            return Err(Error::domain(
                "samples",
                format!("KMS violated by {violation:.3e} (tolerance {kms_tolerance:.1e})"),
            ));
        }
        Ok(model)
    }

    /// Reads a two-column CSV `(omega, R)` with a header line.
    pub fn from_csv_reader<R: Read>(reader: R, beta: f64, kms_tolerance: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut samples = Vec::new();
        for record in rdr.deserialize() {
            let (w, r): (f64, f64) = record?;
            samples.push((w, r));
        }
        Self::tabulated(samples, beta, kms_tolerance)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, beta: f64, kms_tolerance: f64) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, beta, kms_tolerance)
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn table(&self) -> &[(f64, f64)] {
        &self.table
    }

    /// Positive-frequency branch, before the KMS extension.
    fn positive_branch(&self, omega: f64) -> f64 {
        match self.kind {
            DensityKind::FlatKms => self.amplitude,
            DensityKind::PowerAnsatz => {
                self.amplitude * omega.powf(self.exponent) * (-omega / self.cutoff).exp()
            }
            DensityKind::Tabulated => self.interpolate(omega),
        }
    }

    fn interpolate(&self, omega: f64) -> f64 {
        let t = &self.table;
        if omega < t[0].0 || omega > t[t.len() - 1].0 {
            return 0.0;
        }
        let i = t.partition_point(|s| s.0 <= omega);
        if i == t.len() {
            return t[t.len() - 1].1;
        }
        let (w0, r0) = t[i - 1];
        let (w1, r1) = t[i];
        r0 + (r1 - r0) * (omega - w0) / (w1 - w0)
    }

    /// Evaluates R(ω); zero outside the cutoff window.
    pub fn evaluate(&self, omega: f64) -> f64 {
        if omega.abs() > self.cutoff {
            return 0.0;
        }
        match self.kind {
            DensityKind::Tabulated => self.interpolate(omega),
            _ if omega >= 0.0 => self.positive_branch(omega),
            _ => {
                // e^{βω} with ω < 0; an infinite β gives exactly zero
                let boltzmann = if self.beta.is_infinite() { 0.0 } else { (self.beta * omega).exp() };
                boltzmann * self.positive_branch(-omega)
            }
        }
    }

    fn table_kms_violation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for &(w, r) in self.table.iter().filter(|s| s.0 > 0.0) {
            let neg = self.interpolate(-w);
            worst = worst.max(kms_residual(r, neg, self.beta, w));
        }
        worst
    }

    /// Largest relative KMS residual `|R(-ω) e^{βω} / R(ω) - 1|` over the
    /// given positive frequencies.
    pub fn kms_violation(&self, omegas: &[f64]) -> f64 {
        omegas
            .iter()
            .filter(|&&w| w > 0.0 && w <= self.cutoff)
            .map(|&w| kms_residual(self.evaluate(w), self.evaluate(-w), self.beta, w))
            .fold(0.0, f64::max)
    }

    /// Points where R(ω) is not smooth: the cutoff edges, ω = 0 and table nodes.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match self.kind {
            DensityKind::Tabulated => self.table.iter().map(|s| s.0).collect::<Vec<_>>(),
            _ => vec![-self.cutoff, self.cutoff],
        };
        if pts[0] < 0.0 && pts[pts.len() - 1] > 0.0 {
            pts.push(0.0);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// ∫R(ω)dω in closed form where one exists.
    pub fn analytic_total_weight(&self) -> Option<f64> {
        match self.kind {
            DensityKind::FlatKms => {
                let negative = if self.beta == 0.0 {
                    self.cutoff
                } else if self.beta.is_infinite() {
                    0.0
                } else {
                    -(-self.beta * self.cutoff).exp_m1() / self.beta
                };
                Some(self.amplitude * (self.cutoff + negative))
            }
            DensityKind::Tabulated => Some(
                self.table
                    .windows(2)
                    .map(|p| 0.5 * (p[0].1 + p[1].1) * (p[1].0 - p[0].0))
                    .sum(),
            ),
            DensityKind::PowerAnsatz => None,
        }
    }
}

fn kms_residual(positive: f64, negative: f64, beta: f64, omega: f64) -> f64 {
    if positive == 0.0 {
        return if negative == 0.0 { 0.0 } else { f64::INFINITY };
    }
    if beta.is_infinite() {
        return negative / positive;
    }
    (negative * (beta * omega).exp() / positive - 1.0).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_kms_values() {
        let m = SpectralDensityModel::flat_kms(1.0, 10.0, 1.0).unwrap();
        assert_eq!(m.evaluate(1.0), 1.0);
        assert_relative_eq!(m.evaluate(-1.0), (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(m.evaluate(-1.0), 0.3679, epsilon = 1e-4);
        assert_eq!(m.evaluate(10.5), 0.0);
        assert_eq!(m.evaluate(-10.5), 0.0);
    }

    #[test]
    fn power_ansatz_value() {
        let m = SpectralDensityModel::power_ansatz(1.0, 2.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(m.evaluate(0.5), 0.25 * (-0.5f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(m.evaluate(0.5), 0.1516, epsilon = 1e-4);
        assert_relative_eq!(m.evaluate(-0.5), (-0.5f64).exp() * m.evaluate(0.5), max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SpectralDensityModel::flat_kms(-1.0, 1.0, 1.0).is_err());
        assert!(SpectralDensityModel::flat_kms(1.0, 0.0, 1.0).is_err());
        let err = SpectralDensityModel::flat_kms(1.0, 1.0, -0.5).unwrap_err();
        assert!(err.to_string().contains("`beta`"));
        assert!(SpectralDensityModel::power_ansatz(1.0, 0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn tabulated_kms_violation_is_rejected() {
        let beta = 1.0;
        let mut samples = Vec::new();
        for k in -10..=10 {
            let w = k as f64 * 0.5;
            let r = if w >= 0.0 { 1.0 } else { (beta * w).exp() };
            samples.push((w, r));
        }
        assert!(SpectralDensityModel::tabulated(samples.clone(), beta, 1e-9).is_ok());
        // break KMS at ω = -2 by 20 %
        for s in samples.iter_mut() {
            if s.0 == -2.0 {
                s.1 *= 1.2;
            }
        }
        let err = SpectralDensityModel::tabulated(samples, beta, DEFAULT_TABLE_KMS_TOLERANCE).unwrap_err();
        assert!(matches!(err, Error::ParameterDomain { .. }));
    }

    #[test]
    fn csv_round() {
        let text = "omega,R\n-1.0,0.36787944117144233\n0.0,1.0\n1.0,1.0\n";
        let m = SpectralDensityModel::from_csv_reader(text.as_bytes(), 1.0, 1e-9).unwrap();
        assert_eq!(m.kind(), DensityKind::Tabulated);
        assert_eq!(m.cutoff(), 1.0);
        assert_relative_eq!(m.evaluate(0.5), 1.0);
    }

    #[test]
    fn kms_exact_for_builtin_kinds() {
        let omegas: Vec<f64> = (1..=400).map(|k| k as f64 * 0.025).collect();
        for m in [
            SpectralDensityModel::flat_kms(2.0, 10.0, 0.7).unwrap(),
            SpectralDensityModel::power_ansatz(1.5, 3.0, 10.0, 2.0).unwrap(),
        ] {
            assert!(m.kms_violation(&omegas) < 1e-12);
        }
    }

    #[test]
    fn flat_total_weight() {
        let m = SpectralDensityModel::flat_kms(1.0, 10.0, 1.0).unwrap();
        assert_relative_eq!(m.analytic_total_weight().unwrap(), 10.0 + 1.0 - (-10.0f64).exp(), max_relative = 1e-15);
    }
}
