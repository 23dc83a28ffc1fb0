//! Davies generators: rate tables, classical-sector Markov generators,
//! spectra, propagation and the structural checks.

mod checks;
mod eigen;
mod expm;
mod generator;
mod kitaev;
mod model;
mod properties;
mod quantum;
mod rates;
mod sparse;

pub use checks::{
    check_db_stationarity, convexity_bound_check, gap_inequality_check, gibbs_inner, k_squared_gap_bound,
    normalize_zero_mean, ConvexityReport, DbReport, GapInequalityReport, KSquaredVerdict,
};
pub use eigen::{
    dense_eigen, lowest_eigenpairs, lowest_eigenvalues, spectral_gap, EigenMethod, EigenPairs, LanczosOptions,
    SpectralReport, DENSE_LIMIT,
};
pub use expm::{expm_krylov, total_variation, DenseSemigroup};
pub use generator::{
    build_classical_generator, build_classical_generator_with_cap, FlipStructure, GeneratorKind, GeneratorMatrix,
    GeneratorSidecar, DEFAULT_STATE_CAP,
};
pub use kitaev::{kitaev_gaps, kitaev_sector_gap, AnyonChain, KitaevGapConfig, BlockSpectrum, KitaevGapReport, Twist};
pub use model::{FlipModel, SpinSystem};
pub use properties::{davies_properties, PropertiesConfig, PropertiesReport, PropertiesRow};
pub use quantum::{pauli, QuantumDavies, QuantumPropertyReport, MAX_QUANTUM_SPINS};
pub use rates::{build_rates, DaviesRateTable};
pub use sparse::{CsrMatrix, SymmetricOperator};
