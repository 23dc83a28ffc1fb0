//! Born-term audit of error locality: operator support growth on small
//! chains, weighted by bath correlation tails, fit against an exponential
//! law in the number of qubits.

mod born;
mod pipeline;
mod support;

pub use born::{a2_fit, born_error_weights, A2Verdict, ErrorWeightEstimate, A2_MIN_R2, MIN_FIT_SIZES, RELATIVE_FLOOR};
pub use pipeline::{errormap_audit, AuditBath, BathVerdict, ErrormapConfig, ErrormapReport};
pub use support::{
    evolve_support, onset_times, pauli_transform, support_weights, ChainModel, PauliAxis, SupportSpectrum,
    MAX_CHAIN_QUBITS,
};
