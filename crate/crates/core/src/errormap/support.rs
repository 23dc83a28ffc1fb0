use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest chain handled by the dense operator-space evolution.
pub const MAX_CHAIN_QUBITS: usize = 10;

/// Open transverse-field chain H = J Σ Z_i Z_{i+1} + g Σ X_i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainModel {
    pub n_qubits: usize,
    pub coupling: f64,
    pub field: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Z,
}

/// Squared Pauli-basis weight of the evolved operator, by support size.
/// `weights[n - 1]` holds w_n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportSpectrum {
    pub time: f64,
    pub weights: Vec<f64>,
}

impl SupportSpectrum {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest n with w_n above `threshold`.
    pub fn reach(&self, threshold: f64) -> usize {
        self.weights.iter().rposition(|&w| w > threshold).map_or(0, |i| i + 1)
    }
}

impl ChainModel {
    pub fn new(n_qubits: usize, coupling: f64, field: f64) -> Result<Self> {
        let chain = ChainModel { n_qubits, coupling, field };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(Error::domain("n_qubits", "chain needs at least 2 qubits"));
        }
        if self.n_qubits > MAX_CHAIN_QUBITS {
            return Err(Error::Capacity { requested: 1u128 << (2 * self.n_qubits), cap: 1u128 << (2 * MAX_CHAIN_QUBITS) });
        }
        if !self.coupling.is_finite() {
            return Err(Error::domain("coupling", "must be finite"));
        }
        if !self.field.is_finite() {
            return Err(Error::domain("field", "must be finite"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Dense Hamiltonian in the computational basis (qubit k is bit k).
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let n = self.n_qubits;
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        for s in 0..d {
            let zz: f64 = (0..n - 1)
                .map(|k| if ((s >> k) ^ (s >> (k + 1))) & 1 == 0 { 1.0 } else { -1.0 })
                .sum();
            h[(s, s)] = self.coupling * zz;
            for k in 0..n {
                h[(s ^ (1 << k), s)] += self.field;
            }
        }
        h
    }

    /// Single-site Pauli operator as a dense matrix.
    pub fn site_operator(&self, site: usize, axis: PauliAxis) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for s in 0..d {
            match axis {
                PauliAxis::X => m[(s ^ (1 << site), s)] = 1.0,
                PauliAxis::Z => m[(s, s)] = if (s >> site) & 1 == 0 { 1.0 } else { -1.0 },
            }
        }
        m
    }
}

/// In-place Pauli transform of a 2^n × 2^n matrix stored row-major.
/// Afterwards entry (r, c) is Tr(P O)/2^n for the Pauli string whose k-th
/// factor is I, X, Y, Z for (r_k, c_k) = (0,0), (0,1), (1,0), (1,1).
pub fn pauli_transform(a: &mut [Complex64], n: usize) {
    let d = 1usize << n;
    assert_eq!(a.len(), d * d);
    let i = Complex64::i();
    for k in 0..n {
        let b = 1usize << k;
        for r in (0..d).filter(|r| r & b == 0) {
            for c in (0..d).filter(|c| c & b == 0) {
                let (p00, p01, p10, p11) = (r * d + c, r * d + (c | b), (r | b) * d + c, (r | b) * d + (c | b));
                let (m00, m01, m10, m11) = (a[p00], a[p01], a[p10], a[p11]);
                a[p00] = 0.5 * (m00 + m11);
                a[p01] = 0.5 * (m01 + m10);
                a[p10] = 0.5 * i * (m01 - m10);
                a[p11] = 0.5 * (m00 - m11);
            }
        }
    }
}

/// Aggregates |c_P|² of a transformed matrix by support size n = 1..N,
/// divided by `norm`. Identity weight is dropped.
pub fn support_weights(coeffs: &[Complex64], n: usize, norm: f64) -> Vec<f64> {
    let d = 1usize << n;
    let mut w = vec![0.0; n];
    for r in 0..d {
        for c in 0..d {
            let s = (r | c).count_ones() as usize;
            if s > 0 {
                w[s - 1] += coeffs[r * d + c].norm_sqr();
            }
        }
    }
    w.iter_mut().for_each(|x| *x /= norm);
    w
}

/// Heisenberg-evolves the Pauli operator on `site` under the chain and
/// returns its support spectrum at every grid time.
pub fn evolve_support(chain: &ChainModel, site: usize, axis: PauliAxis, t_grid: &[f64]) -> Result<Vec<SupportSpectrum>> {
    chain.validate()?;
    let n = chain.n_qubits;
    if site >= n {
        return Err(Error::domain("site", format!("{site} is outside a chain of {n} qubits")));
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("t_grid", "times must be finite"));
    }
    let d = chain.dim();
    let eig = SymmetricEigen::new(chain.hamiltonian());
    let v = eig.eigenvectors;
    let e = eig.eigenvalues;
    let o = chain.site_operator(site, axis);
    let rotated = v.transpose() * &o * &v;
    let norm = o.iter().map(|x| x * x).sum::<f64>() / d as f64;
    Ok(t_grid
        .par_iter()
        .map(|&t| {
            let cos = DMatrix::from_fn(d, d, |a, b| ((e[a] - e[b]) * t).cos() * rotated[(a, b)]);
            let sin = DMatrix::from_fn(d, d, |a, b| ((e[a] - e[b]) * t).sin() * rotated[(a, b)]);
            let re = &v * cos * v.transpose();
            let im = &v * sin * v.transpose();
            // nalgebra is column-major; transpose into row-major order.
            let mut a: Vec<Complex64> = (0..d * d).map(|p| Complex64::new(re[(p / d, p % d)], im[(p / d, p % d)])).collect();
            pauli_transform(&mut a, n);
            SupportSpectrum { time: t, weights: support_weights(&a, n, norm) }
        })
        .collect())
}

/// First grid time at which w_n exceeds `threshold`, per n.
pub fn onset_times(spectra: &[SupportSpectrum], threshold: f64) -> Vec<Option<f64>> {
    let n = spectra.first().map_or(0, |s| s.weights.len());
    (0..n).map(|k| spectra.iter().find(|s| s.weights[k] > threshold).map(|s| s.time)).collect()
}
