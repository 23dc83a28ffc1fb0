use nalgebra::DMatrix;
use serde::Serialize;

use super::eigen::dense_eigen;
use super::generator::GeneratorKind;
use crate::bath::SpectralDensityModel;
use crate::error::{Error, Result};

/// Largest spin count for the dense operator-space generator.
pub const MAX_QUANTUM_SPINS: usize = 6;

/// Dense Davies generator on the full operator algebra of a few spins,
/// written in the Hamiltonian eigenbasis. Used to cross-check the classical
/// sector reductions.
#[derive(Debug, Clone)]
pub struct QuantumDavies {
    pub kind: GeneratorKind,
    pub beta: f64,
    energies: Vec<f64>,
    gibbs: Vec<f64>,
    /// Column `i·d + j` is 𝓛*(|i⟩⟨j|), flattened row-major.
    superop: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumPropertyReport {
    /// max_X |Tr(ρ_β 𝓛*(X))| over matrix units X.
    pub stationarity: f64,
    /// Largest asymmetry of ⟨X, 𝓛*Y⟩_β.
    pub detailed_balance: f64,
    /// Largest eigenvalue of the symmetric form ⟨X, 𝓛*X⟩_β (should be ≤ 0).
    pub max_form_eigenvalue: f64,
    /// ‖[ℋ, 𝓛*]‖ on matrix units.
    pub hamiltonian_commutator: f64,
}

/// Pauli σ^x or σ^z acting on `site` of `n` spins (site 0 is the lowest bit).
pub fn pauli(n: usize, site: usize, kind: char) -> DMatrix<f64> {
    let d = 1usize << n;
    let mut m = DMatrix::zeros(d, d);
    for x in 0..d {
        match kind {
            'x' => m[(x ^ (1 << site), x)] = 1.0,
            'z' => m[(x, x)] = if x >> site & 1 == 1 { -1.0 } else { 1.0 },
            _ => panic!("unsupported Pauli {kind}"),
        }
    }
    m
}

impl QuantumDavies {
    /// `𝓛*X = λ² Σ_α Σ_ω R(ω) (S_α(ω)ᵀ X S_α(ω) − ½{S_α(ω)ᵀ S_α(ω), X})`
    /// with `S(ω) = Σ_{E_b − E_a = ω} |a⟩⟨a|S|b⟩⟨b|`, so ω > 0 lowers the energy.
    pub fn build(h: &DMatrix<f64>, couplings: &[DMatrix<f64>], bath: &SpectralDensityModel, lambda2: f64) -> Result<Self> {
        let d = h.nrows();
        if !h.is_square() || !d.is_power_of_two() || d > 1 << MAX_QUANTUM_SPINS {
            return Err(Error::domain("hamiltonian", format!("need a 2^n × 2^n matrix with n ≤ {MAX_QUANTUM_SPINS}")));
        }
        let beta = bath.beta();
        if !beta.is_finite() {
            return Err(Error::domain("beta", "must be finite"));
        }
        let off_diag = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).filter(|(i, j)| i != j).any(|(i, j)| h[(i, j)] != 0.0);
        let (energies, u) = if off_diag {
            let (vals, vecs) = dense_eigen(h);
            (vals, vecs)
        } else {
            ((0..d).map(|i| h[(i, i)]).collect(), DMatrix::identity(d, d))
        };
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = energies.iter().map(|e| (-beta * (e - e_min)).exp()).collect();
        let z: f64 = w.iter().sum();
        let gibbs: Vec<f64> = w.iter().map(|x| x / z).collect();

        let mut omegas: Vec<f64> = Vec::new();
        for a in 0..d {
            for b in 0..d {
                let om = energies[b] - energies[a];
                if !omegas.iter().any(|&o| (o - om).abs() < 1e-9) {
                    omegas.push(om);
                }
            }
        }
        // S(ω) components with their rates
        let mut parts: Vec<(f64, DMatrix<f64>)> = Vec::new();
        for s in couplings {
            if s.shape() != (d, d) {
                return Err(Error::domain("couplings", "shape must match the Hamiltonian"));
            }
            let se = u.transpose() * s * &u;
            for &om in &omegas {
                let comp = DMatrix::from_fn(d, d, |a, b| {
                    if (energies[b] - energies[a] - om).abs() < 1e-9 {
                        se[(a, b)]
                    } else {
                        0.0
                    }
                });
                if comp.abs().max() > 0.0 {
                    let rate = lambda2 * bath.evaluate(om);
                    if rate > 0.0 {
                        parts.push((rate, comp));
                    }
                }
            }
        }
        let mut superop = DMatrix::zeros(d * d, d * d);
        for (rate, s) in &parts {
            let sts = s.transpose() * s;
            for i in 0..d {
                for j in 0..d {
                    let col = i * d + j;
                    // Sᵀ E_ij S has entries S_ik S_jl
                    for k in 0..d {
                        let sik = s[(i, k)];
                        if sik != 0.0 {
                            for l in 0..d {
                                superop[(k * d + l, col)] += rate * sik * s[(j, l)];
                            }
                        }
                    }
                    // −½ (SᵀS E_ij + E_ij SᵀS)
                    for k in 0..d {
                        superop[(k * d + j, col)] -= 0.5 * rate * sts[(k, i)];
                        superop[(i * d + k, col)] -= 0.5 * rate * sts[(j, k)];
                    }
                }
            }
        }
        Ok(Self { kind: GeneratorKind::FullDavies, beta, energies, gibbs, superop })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn gibbs(&self) -> &[f64] {
        &self.gibbs
    }

    /// 𝓛* applied to a matrix written in the eigenbasis.
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let d = self.dim();
        let v = nalgebra::DVector::from_iterator(d * d, (0..d * d).map(|k| x[(k / d, k % d)]));
        let out = &self.superop * v;
        DMatrix::from_fn(d, d, |i, j| out[i * d + j])
    }

    /// The Liouville form `G[(ij),(kl)] = ⟨|i⟩⟨j|, 𝓛*|k⟩⟨l|⟩_β = π_j·𝓛*(|k⟩⟨l|)_{ij}`.
    pub fn liouville_form(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d * d, d * d, |r, c| self.gibbs[r % d] * self.superop[(r, c)])
    }

    pub fn properties(&self) -> QuantumPropertyReport {
        let d = self.dim();
        let stationarity = (0..d * d)
            .map(|c| (0..d).map(|k| self.gibbs[k] * self.superop[(k * d + k, c)]).sum::<f64>().abs())
            .fold(0.0, f64::max);
        let g = self.liouville_form();
        let detailed_balance = (&g - g.transpose()).abs().max();
        let (vals, _) = dense_eigen(&(0.5 * (&g + g.transpose())));
        // [H, ·] is diagonal on matrix units with entries E_i − E_j
        let comm = DMatrix::from_fn(d * d, d * d, |r, c| {
            let bohr = |k: usize| self.energies[k / d] - self.energies[k % d];
            (bohr(r) - bohr(c)) * self.superop[(r, c)]
        });
        QuantumPropertyReport {
            stationarity,
            detailed_balance,
            max_form_eigenvalue: *vals.last().unwrap(),
            hamiltonian_commutator: comm.abs().max(),
        }
    }

    /// Rate of the transition `|x⟩ → |y⟩` among diagonal observables:
    /// `𝓛*(|y⟩⟨y|)_{xx}`.
    pub fn diagonal_rate(&self, x: usize, y: usize) -> f64 {
        let d = self.dim();
        self.superop[(x * d + x, y * d + y)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::davies::{build_classical_generator, build_rates, FlipModel};
    use crate::lattice::IsingLattice;

    fn ising_chain(n: usize, field: f64) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(1 << n, 1 << n);
        for i in 0..n {
            h -= pauli(n, i, 'z') * pauli(n, (i + 1) % n, 'z');
            h -= field * pauli(n, i, 'x');
        }
        h
    }

    #[test]
    fn diagonal_sector_is_the_classical_generator() {
        let n = 4;
        let bath = SpectralDensityModel::flat_kms(1.0, 10.0, 0.8).unwrap();
        let couplings: Vec<_> = (0..n).map(|i| pauli(n, i, 'x')).collect();
        let q = QuantumDavies::build(&ising_chain(n, 0.0), &couplings, &bath, 0.5).unwrap();
        let m = FlipModel::ising(IsingLattice::ring(n).unwrap(), 1.0).unwrap();
        let g = build_classical_generator(&m, &build_rates(&bath, &m.bohr_frequencies(), 0.5).unwrap()).unwrap();
        for x in 0..16 {
            for y in 0..16 {
                if x != y {
                    assert!((q.diagonal_rate(x, y) - g.rate(x, y)).abs() < 1e-14, "{x}->{y}");
                }
            }
        }
    }

    #[test]
    fn d1_to_d4_hold_with_a_transverse_field() {
        let n = 3;
        let bath = SpectralDensityModel::flat_kms(1.0, 20.0, 0.7).unwrap();
        let couplings: Vec<_> = (0..n).flat_map(|i| [pauli(n, i, 'x'), pauli(n, i, 'z')]).collect();
        let q = QuantumDavies::build(&ising_chain(n, 0.37), &couplings, &bath, 1.0).unwrap();
        let r = q.properties();
        assert!(r.stationarity < 1e-12, "{r:?}");
        assert!(r.detailed_balance < 1e-12, "{r:?}");
        assert!(r.max_form_eigenvalue < 1e-12, "{r:?}");
        assert!(r.hamiltonian_commutator < 1e-12, "{r:?}");
    }

    #[test]
    fn identity_is_annihilated() {
        let n = 2;
        let bath = SpectralDensityModel::flat_kms(1.0, 10.0, 1.0).unwrap();
        let q = QuantumDavies::build(&ising_chain(n, 0.2), &[pauli(n, 0, 'x')], &bath, 1.0).unwrap();
        assert!(q.apply(&DMatrix::identity(4, 4)).abs().max() < 1e-14);
    }
}
