//! Thermal bath spectral densities, their correlation functions, and the
//! nontriviality conditions placed on them.

mod audit;
mod collective;
mod conditions;
mod correlation;
mod density;
mod tail;

pub use audit::{bath_audit, AuditOptions, BathAudit};
pub use collective::{collective_rank, r1_margin, CorrelationMatrixSpec, Coupling, RANK_TOLERANCE};
pub use conditions::{
    check_conditions, check_conditions_with, r2_grid, tb_gate_time_bound, BathConditionsReport, GateTimeBound,
    DEFAULT_R2_THRESHOLD, R2_GRID_FLOOR, R2_GRID_POINTS,
};
pub use correlation::{
    correlation_function, correlation_function_with, CorrelationFunction, QuadratureInfo, QuadratureOptions,
};
pub use density::{build_spectral_density, DensityKind, DensitySpec, SpectralDensityModel, DEFAULT_TABLE_KMS_TOLERANCE};
pub use tail::{tail_fit, tail_grid, TailFit, MIN_TAIL_POINTS, POWER_LAW_RESIDUAL_THRESHOLD};
pub(crate) use tail::line_fit;
