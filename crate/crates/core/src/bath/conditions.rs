use serde::Serialize;

use super::{DensityKind, SpectralDensityModel};
use crate::error::{Error, Result};

/// Log-grid size used for the R2 infimum.
pub const R2_GRID_POINTS: usize = 400;
/// Lower end of the R2 grid, as a fraction of the cutoff.
pub const R2_GRID_FLOOR: f64 = 1e-6;
/// Default threshold above which η counts as bounded away from zero.
pub const DEFAULT_R2_THRESHOLD: f64 = 1e-9;

/// Nontriviality checks on a spectral density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathConditionsReport {
    pub kms_max_violation: f64,
    /// inf over (0, Ω] of R(ω)/ω: analytic where known, else sampled.
    pub r2_constant: f64,
    /// Minimum of R(ω)/ω over the log grid.
    pub r2_sampled_min: f64,
    pub r2_threshold: f64,
    pub r2_satisfied: bool,
    /// Set for the power ansatz with exponent exactly 1, where R(ω)/ω stays
    /// bounded below on (0, Ω] even though that family is usually described
    /// as failing the condition.
    pub linear_ansatz_edge_case: bool,
    /// `(ω, R(ω)/ω)`: the per-gate error floor τR(ω) for a gate of duration τ = 1/ω.
    pub gate_error_floor: Vec<(f64, f64)>,
}

/// 400 log-spaced frequencies in (10⁻⁶ Ω, Ω], the last one exactly Ω.
pub fn r2_grid(cutoff: f64) -> Vec<f64> {
    let lo = (R2_GRID_FLOOR * cutoff).ln();
    let hi = cutoff.ln();
    (1..=R2_GRID_POINTS)
        .map(|k| {
            if k == R2_GRID_POINTS {
                cutoff
            } else {
                (lo + (hi - lo) * k as f64 / R2_GRID_POINTS as f64).exp()
            }
        })
        .collect()
}

fn analytic_r2(model: &SpectralDensityModel) -> Option<f64> {
    match model.kind() {
        // R/ω decreases; the infimum sits at the cutoff
        DensityKind::FlatKms => Some(model.amplitude() / model.cutoff()),
        DensityKind::PowerAnsatz => {
            let d = model.exponent();
            if d > 1.0 {
                Some(0.0)
            } else {
                // d = 1: C e^{-ω/Ω} is monotone, smallest at Ω
                Some(model.amplitude() * (-1.0f64).exp())
            }
        }
        DensityKind::Tabulated => None,
    }
}

pub fn check_conditions(model: &SpectralDensityModel) -> BathConditionsReport {
    check_conditions_with(model, DEFAULT_R2_THRESHOLD)
}

pub fn check_conditions_with(model: &SpectralDensityModel, r2_threshold: f64) -> BathConditionsReport {
    let grid = r2_grid(model.cutoff());
    let gate_error_floor: Vec<(f64, f64)> = grid.iter().map(|&w| (w, model.evaluate(w) / w)).collect();
    let r2_sampled_min = gate_error_floor.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let r2_constant = analytic_r2(model).unwrap_or(r2_sampled_min);
    BathConditionsReport {
        kms_max_violation: model.kms_violation(&grid),
        r2_constant,
        r2_sampled_min,
        r2_threshold,
        r2_satisfied: r2_constant > r2_threshold,
        linear_ansatz_edge_case: model.kind() == DensityKind::PowerAnsatz && model.exponent() == 1.0,
        gate_error_floor,
    }
}

/// Gate-time bound from the chain `½ηΩ² < ∫R ≤ ‖B‖² ≤ ε²/τ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateTimeBound {
    pub tau_max: f64,
    pub eta: f64,
    pub cutoff: f64,
    pub epsilon: f64,
    /// ½ηΩ², the lower end of the chain.
    pub weight_lower_bound: f64,
    /// ε²/τ_max², the upper end evaluated at the bound.
    pub norm_upper_bound: f64,
}

impl GateTimeBound {
    /// Whether a gate of duration `tau` is compatible with the chain.
    pub fn admits(&self, tau: f64) -> bool {
        self.weight_lower_bound <= self.epsilon * self.epsilon / (tau * tau)
    }
}

pub fn tb_gate_time_bound(eta: f64, cutoff: f64, epsilon: f64) -> Result<GateTimeBound> {
    for (key, v) in [("eta", eta), ("cutoff", cutoff), ("epsilon", epsilon)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(key, format!("must be finite and > 0, got {v}")));
        }
    }
    if epsilon >= 1.0 {
        return Err(Error::domain("epsilon", format!("must be < 1, got {epsilon}")));
    }
    let tau_max = epsilon * (2.0 / eta).sqrt() / cutoff;
    Ok(GateTimeBound {
        tau_max,
        eta,
        cutoff,
        epsilon,
        weight_lower_bound: 0.5 * eta * cutoff * cutoff,
        norm_upper_bound: epsilon * epsilon / (tau_max * tau_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_density_eta_at_cutoff() {
        let m = SpectralDensityModel::flat_kms(1.0, 10.0, 1.0).unwrap();
        let r = check_conditions(&m);
        assert_eq!(r.r2_constant, 0.1);
        assert_eq!(r.r2_sampled_min, 0.1);
        assert!(r.r2_satisfied);
        assert!(r.kms_max_violation < 1e-12);
    }

    #[test]
    fn quadratic_ansatz_fails_r2() {
        let m = SpectralDensityModel::power_ansatz(1.0, 2.0, 1.0, 1.0).unwrap();
        let r = check_conditions(&m);
        assert_eq!(r.r2_constant, 0.0);
        assert!(r.r2_sampled_min < 1e-3);
        assert!(!r.r2_satisfied);
        assert!(!r.linear_ansatz_edge_case);
    }

    #[test]
    fn linear_ansatz_is_flagged() {
        let m = SpectralDensityModel::power_ansatz(1.0, 1.0, 1.0, 1.0).unwrap();
        let r = check_conditions(&m);
        assert_relative_eq!(r.r2_constant, (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(r.r2_sampled_min, (-1.0f64).exp(), max_relative = 1e-12);
        assert!(r.r2_satisfied);
        assert!(r.linear_ansatz_edge_case);
    }

    #[test]
    fn grid_shape() {
        let g = r2_grid(10.0);
        assert_eq!(g.len(), 400);
        assert!(g[0] > 1e-5 && g[0] < 1e-4);
        assert_eq!(g[399], 10.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn gate_time_examples() {
        let b = tb_gate_time_bound(0.01, 100.0, 0.1).unwrap();
        assert_relative_eq!(b.tau_max, 0.1 * 200f64.sqrt() / 100.0, max_relative = 1e-15);
        assert_relative_eq!(b.tau_max, 0.014142, epsilon = 1e-6);
        let doubled = tb_gate_time_bound(0.01, 200.0, 0.1).unwrap();
        assert_relative_eq!(doubled.tau_max, 0.5 * b.tau_max, max_relative = 1e-15);
        let near_one = tb_gate_time_bound(2.0, 1.0, 1.0 - 1e-9).unwrap();
        assert_relative_eq!(near_one.tau_max, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn gate_time_chain_is_tight() {
        let b = tb_gate_time_bound(0.3, 7.0, 0.2).unwrap();
        assert_relative_eq!(b.weight_lower_bound, b.norm_upper_bound, max_relative = 1e-12);
        assert!(b.admits(0.999 * b.tau_max));
        assert!(!b.admits(1.001 * b.tau_max));
    }

    #[test]
    fn gate_time_domain() {
        assert!(tb_gate_time_bound(0.0, 1.0, 0.1).is_err());
        assert!(tb_gate_time_bound(1.0, 1.0, 1.0).is_err());
        assert!(tb_gate_time_bound(1.0, -1.0, 0.5).is_err());
    }
}
