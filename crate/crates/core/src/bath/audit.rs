use serde::{Deserialize, Serialize};

use super::{
    check_conditions_with, correlation_function, tail_fit, tail_grid, tb_gate_time_bound, BathConditionsReport,
    GateTimeBound, SpectralDensityModel, TailFit, DEFAULT_R2_THRESHOLD,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditOptions {
    /// Tail window start in units of 1/Ω.
    pub tail_start: f64,
    /// Tail window end in units of 1/Ω.
    pub tail_end: f64,
    /// Time samples per cutoff period.
    pub samples_per_period: usize,
    pub r2_threshold: f64,
    /// Target error per gate for the gate-time bound.
    pub epsilon: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { tail_start: 200.0, tail_end: 2000.0, samples_per_period: 32, r2_threshold: DEFAULT_R2_THRESHOLD, epsilon: 0.1 }
    }
}

/// Everything the `bath-audit` run reports about one density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathAudit {
    pub kms_max_violation: f64,
    pub r2_constant: f64,
    pub r2_satisfied: bool,
    pub tail_exponent: f64,
    pub tail_amplitude: f64,
    pub tail_residual: f64,
    pub tail_power_law: bool,
    /// Absent when η = 0, where the chain gives no bound.
    pub tau_max: Option<f64>,
    pub total_weight: f64,
    pub quadrature_error_bound: f64,
    pub conditions: BathConditionsReport,
    pub tail: TailFit,
    pub gate_time: Option<GateTimeBound>,
}

pub fn bath_audit(model: &SpectralDensityModel, opts: &AuditOptions) -> Result<BathAudit> {
    if !(opts.tail_start > 0.0 && opts.tail_end > opts.tail_start) {
        return Err(Error::domain("tail_end", "need 0 < tail_start < tail_end"));
    }
    if opts.samples_per_period < 8 {
        return Err(Error::domain("samples_per_period", "must be ≥ 8"));
    }
    let cutoff = model.cutoff();
    let (t_min, t_max) = (opts.tail_start / cutoff, opts.tail_end / cutoff);
    let mut grid = vec![0.0];
    grid.extend(tail_grid(cutoff, t_min, t_max, opts.samples_per_period));
    let corr = correlation_function(model, &grid)?;
    let tail = tail_fit(&corr, t_min, t_max)?;
    let conditions = check_conditions_with(model, opts.r2_threshold);
    let gate_time = if conditions.r2_constant > 0.0 {
        Some(tb_gate_time_bound(conditions.r2_constant, cutoff, opts.epsilon)?)
    } else {
        None
    };
    Ok(BathAudit {
        kms_max_violation: conditions.kms_max_violation,
        r2_constant: conditions.r2_constant,
        r2_satisfied: conditions.r2_satisfied,
        tail_exponent: tail.exponent,
        tail_amplitude: tail.amplitude,
        tail_residual: tail.residual,
        tail_power_law: tail.power_law,
        tau_max: gate_time.map(|g| g.tau_max),
        total_weight: corr.values[0].re,
        quadrature_error_bound: corr.quadrature.as_ref().map_or(0.0, |q| q.error_bound),
        conditions,
        tail,
        gate_time,
    })
}
