use serde::Serialize;

use crate::bath::SpectralDensityModel;
use crate::error::{Error, Result};

/// Transition rates λ²·R(ω) at a finite set of Bohr frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DaviesRateTable {
    pub coupling: f64,
    pub beta: f64,
    /// `(ω, rate)` sorted by ω.
    entries: Vec<(f64, f64)>,
}

fn same_frequency(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Builds rates at `bohr_frequencies`, which must be closed under negation.
/// Negative frequencies are filled as `e^{-β|ω|}·rate(|ω|)`, so detailed
/// balance holds to rounding.
pub fn build_rates(model: &SpectralDensityModel, bohr_frequencies: &[f64], coupling: f64) -> Result<DaviesRateTable> {
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::domain("coupling", format!("λ² must be finite and > 0, got {coupling}")));
    }
    let mut freqs: Vec<f64> = bohr_frequencies.to_vec();
    if freqs.iter().any(|w| !w.is_finite()) {
        return Err(Error::domain("bohr_frequencies", "non-finite frequency"));
    }
    freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    freqs.dedup_by(|a, b| same_frequency(*a, *b));
    for &w in &freqs {
        if w.abs() > model.cutoff() * (1.0 + 1e-12) {
            return Err(Error::domain(
                "bohr_frequencies",
                format!("ω = {w} lies outside the cutoff window [−{0}, {0}]", model.cutoff()),
            ));
        }
        if !freqs.iter().any(|&v| same_frequency(v, -w)) {
            return Err(Error::domain("bohr_frequencies", format!("set is not closed under negation (missing {})", -w)));
        }
    }
    let beta = model.beta();
    let entries = freqs
        .iter()
        .map(|&w| {
            let rate = if w >= 0.0 {
                coupling * model.evaluate(w)
            } else if beta.is_infinite() {
                0.0
            } else {
                coupling * model.evaluate(-w) * (beta * w).exp()
            };
            (w, rate)
        })
        .collect();
    Ok(DaviesRateTable { coupling, beta, entries })
}

impl DaviesRateTable {
    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn rate(&self, omega: f64) -> Option<f64> {
        self.entries.iter().find(|(w, _)| same_frequency(*w, omega)).map(|p| p.1)
    }

    pub fn max_rate(&self) -> f64 {
        self.entries.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    /// Largest `|rate(−ω) − e^{−βω}·rate(ω)|` relative to `rate(ω)`.
    pub fn detailed_balance_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for &(w, r) in self.entries.iter().filter(|p| p.0 > 0.0) {
            let back = self.rate(-w).unwrap_or(f64::NAN);
            let expect = if self.beta.is_infinite() { 0.0 } else { (-self.beta * w).exp() * r };
            let scale = r.max(f64::MIN_POSITIVE);
            worst = worst.max((back - expect).abs() / scale);
        }
        worst
    }

    /// Copy with the entry at `omega` multiplied by `factor` (for violation tests).
    pub fn perturbed(&self, omega: f64, factor: f64) -> Self {
        let mut out = self.clone();
        for e in out.entries.iter_mut() {
            if same_frequency(e.0, omega) {
                e.1 *= factor;
            }
        }
        out
    }
}
