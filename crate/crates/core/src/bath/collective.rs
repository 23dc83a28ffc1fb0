use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative eigenvalue cut used for numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Each qubit sees an independent copy of the bath.
    Private,
    /// All qubits couple to a single bath through the same operators.
    Collective,
}

/// Single-qubit correlation matrix `R_μν(ω)` sampled at a set of frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationMatrixSpec {
    pub n_qubits: usize,
    pub coupling: Coupling,
    /// `(ω, R_μν(ω))` pairs sorted by ω. A single entry means the matrix is
    /// frequency independent.
    pub base_matrix: Vec<(f64, [[f64; 3]; 3])>,
}

impl CorrelationMatrixSpec {
    pub fn constant(n_qubits: usize, coupling: Coupling, base: [[f64; 3]; 3]) -> Result<Self> {
        let spec = Self { n_qubits, coupling, base_matrix: vec![(0.0, base)] };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::domain("n_qubits", "must be ≥ 1"));
        }
        if self.base_matrix.is_empty() {
            return Err(Error::domain("base_matrix", "needs at least one sample"));
        }
        if self.base_matrix.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::domain("base_matrix", "frequencies must be strictly increasing"));
        }
        for (w, m) in &self.base_matrix {
            let m = Matrix3::from_fn(|i, j| m[i][j]);
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain("base_matrix", format!("non-finite entry at ω = {w}")));
            }
            if (m - m.transpose()).abs().max() > 1e-12 * m.abs().max().max(1.0) {
                return Err(Error::domain("base_matrix", format!("not symmetric at ω = {w}")));
            }
            let min = m.symmetric_eigenvalues().min();
            if min < -1e-12 * m.abs().max().max(1.0) {
                return Err(Error::domain(
                    "base_matrix",
                    format!("not positive semidefinite at ω = {w} (eigenvalue {min:.3e})"),
                ));
            }
        }
        Ok(())
    }

    /// `R_μν(ω)`, linearly interpolated and held constant past the ends.
    pub fn base_at(&self, omega: f64) -> Matrix3<f64> {
        let s = &self.base_matrix;
        let to_m = |m: &[[f64; 3]; 3]| Matrix3::from_fn(|i, j| m[i][j]);
        if omega <= s[0].0 {
            return to_m(&s[0].1);
        }
        if omega >= s[s.len() - 1].0 {
            return to_m(&s[s.len() - 1].1);
        }
        let k = s.partition_point(|p| p.0 <= omega);
        let (w0, m0) = (&s[k - 1].0, to_m(&s[k - 1].1));
        let (w1, m1) = (&s[k].0, to_m(&s[k].1));
        let f = (omega - w0) / (w1 - w0);
        m0 * (1.0 - f) + m1 * f
    }

    /// The `3N × 3N` matrix indexed by `(μ, j)` with `3·j + μ` ordering.
    pub fn expanded(&self, omega: f64) -> DMatrix<f64> {
        let n = self.n_qubits;
        let base = self.base_at(omega);
        DMatrix::from_fn(3 * n, 3 * n, |a, b| {
            let (j, mu) = (a / 3, a % 3);
            let (k, nu) = (b / 3, b % 3);
            match self.coupling {
                Coupling::Collective => base[(mu, nu)],
                Coupling::Private if j == k => base[(mu, nu)],
                Coupling::Private => 0.0,
            }
        })
    }
}

fn eigenvalues(spec: &CorrelationMatrixSpec, omega: f64) -> Vec<f64> {
    let eig = SymmetricEigen::new(spec.expanded(omega));
    eig.eigenvalues.iter().copied().collect()
}

/// Number of eigenvalues of the expanded matrix above `1e-10 ×` the largest.
pub fn collective_rank(spec: &CorrelationMatrixSpec, omega: f64) -> usize {
    let ev = eigenvalues(spec, omega);
    let top = ev.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if top == 0.0 {
        return 0;
    }
    ev.iter().filter(|&&v| v > RANK_TOLERANCE * top).count()
}

/// Smallest eigenvalue of the expanded matrix: the largest `R` with
/// `𝓡(ω) − R·I ≥ 0`. Zero (up to rounding) for rank-deficient coupling.
pub fn r1_margin(spec: &CorrelationMatrixSpec, omega: f64) -> f64 {
    eigenvalues(spec, omega).into_iter().fold(f64::INFINITY, f64::min)
}
