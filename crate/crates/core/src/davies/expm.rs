use nalgebra::DMatrix;

use super::eigen::{dense_eigen, DENSE_LIMIT};
use super::sparse::{axpy, dot, norm, SymmetricOperator};
use super::GeneratorMatrix;
use crate::error::{Error, Result};

/// Full eigendecomposition of the symmetrized generator, for exact
/// propagation of small systems.
#[derive(Debug, Clone)]
pub struct DenseSemigroup {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    root_pi: Vec<f64>,
}

impl DenseSemigroup {
    pub fn new(gen: &GeneratorMatrix) -> Result<Self> {
        if gen.dim() > DENSE_LIMIT {
            return Err(Error::Capacity { requested: gen.dim() as u128, cap: DENSE_LIMIT as u128 });
        }
        let (values, vectors) = dense_eigen(&gen.symmetrized().to_dense());
        let root_pi = gen.gibbs().iter().map(|p| p.sqrt()).collect();
        Ok(Self { values, vectors, root_pi })
    }

    /// Eigenvalues of −𝓛*, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Coefficients of `Π^{1/2} f` in the eigenbasis.
    pub fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        let g: Vec<f64> = f.iter().zip(&self.root_pi).map(|(a, b)| a * b).collect();
        (0..self.values.len()).map(|k| self.vectors.column(k).iter().zip(&g).map(|(u, x)| u * x).sum()).collect()
    }

    /// ⟨f, e^{t𝓛*} g⟩_β = Σ_x π_x f(x) (e^{t𝓛*} g)(x).
    pub fn correlation(&self, f: &[f64], g: &[f64], t: f64) -> f64 {
        let cf = self.coefficients(f);
        let cg = self.coefficients(g);
        self.values.iter().zip(cf.iter().zip(&cg)).map(|(l, (a, b))| (-t * l).exp() * a * b).sum()
    }

    /// Correlations at many times from precomputed coefficients.
    pub fn correlation_series(&self, f: &[f64], g: &[f64], times: &[f64]) -> Vec<f64> {
        let cf = self.coefficients(f);
        let cg = self.coefficients(g);
        times
            .iter()
            .map(|&t| self.values.iter().zip(cf.iter().zip(&cg)).map(|(l, (a, b))| (-t * l).exp() * a * b).sum())
            .collect()
    }

    /// `e^{t𝓛*} f`.
    pub fn evolve_observable(&self, f: &[f64], t: f64) -> Vec<f64> {
        let c = self.coefficients(f);
        let n = self.values.len();
        (0..n)
            .map(|x| {
                let s: f64 = (0..n).map(|k| self.vectors[(x, k)] * (-t * self.values[k]).exp() * c[k]).sum();
                s / self.root_pi[x]
            })
            .collect()
    }

    /// Forward evolution of a probability vector.
    pub fn evolve_distribution(&self, p: &[f64], t: f64) -> Vec<f64> {
        let n = self.values.len();
        let g: Vec<f64> = p.iter().zip(&self.root_pi).map(|(a, b)| a / b).collect();
        let c: Vec<f64> = (0..n).map(|k| self.vectors.column(k).iter().zip(&g).map(|(u, x)| u * x).sum()).collect();
        (0..n)
            .map(|x| {
                let s: f64 = (0..n).map(|k| self.vectors[(x, k)] * (-t * self.values[k]).exp() * c[k]).sum();
                s * self.root_pi[x]
            })
            .collect()
    }
}

/// `e^{−tA} v` for a positive semidefinite symmetric operator, by
/// time-stepped Lanczos with an a-posteriori error estimate per step.
pub fn expm_krylov(op: &dyn SymmetricOperator, v: &[f64], t: f64, tol: f64) -> Result<Vec<f64>> {
    const M: usize = 30;
    let n = op.dim();
    let mut w = v.to_vec();
    let mut remaining = t;
    let mut tau = t;
    let mut steps = 0usize;
    while remaining > 0.0 {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::numerical("expm_krylov", "too many substeps"));
        }
        let beta0 = norm(&w);
        if beta0 == 0.0 {
            return Ok(w);
        }
        let mut basis: Vec<Vec<f64>> = vec![w.iter().map(|x| x / beta0).collect()];
        let mut alpha = Vec::with_capacity(M);
        let mut beta = Vec::<f64>::with_capacity(M);
        let mut z = vec![0.0; n];
        for j in 0..M.min(n) {
            op.apply(&basis[j], &mut z);
            let a = dot(&basis[j], &z);
            axpy(-a, &basis[j], &mut z);
            if j > 0 {
                axpy(-beta[j - 1], &basis[j - 1], &mut z);
            }
            for u in &basis {
                let c = dot(u, &z);
                axpy(-c, u, &mut z);
            }
            alpha.push(a);
            let b = norm(&z);
            beta.push(b);
            if b <= 1e-14 * a.abs().max(1.0) {
                break;
            }
            basis.push(z.iter().map(|x| x / b).collect());
        }
        let m = alpha.len();
        let mut tm = DMatrix::<f64>::zeros(m, m);
        for j in 0..m {
            tm[(j, j)] = alpha[j];
            if j + 1 < m {
                tm[(j, j + 1)] = beta[j];
                tm[(j + 1, j)] = beta[j];
            }
        }
        let (theta, y) = dense_eigen(&tm);
        let exp_e1 = |s: f64| -> Vec<f64> {
            (0..m).map(|r| (0..m).map(|c| y[(r, c)] * (-s * theta[c]).exp() * y[(0, c)]).sum()).collect()
        };
        let happy = m < M.min(n) || beta[m - 1] <= 1e-14 * alpha[m - 1].abs().max(1.0);
        tau = tau.min(remaining);
        let coeffs = loop {
            let c = exp_e1(tau);
            let err = if happy { 0.0 } else { beta0 * beta[m - 1] * c[m - 1].abs() };
            if err <= tol * beta0 * (tau / t).max(1e-3) || tau < 1e-12 * t {
                break c;
            }
            tau *= 0.5;
        };
        let mut next = vec![0.0; n];
        for (j, c) in coeffs.iter().enumerate() {
            axpy(beta0 * c, &basis[j], &mut next);
        }
        w = next;
        remaining -= tau;
        if remaining < 1e-14 * t {
            remaining = 0.0;
        }
        tau *= 2.0;
    }
    Ok(w)
}

/// Total-variation distance between two distributions.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::SpectralDensityModel;
    use crate::davies::{build_classical_generator, build_rates, FlipModel};
    use crate::lattice::IsingLattice;

    fn ring(n: usize, beta: f64) -> GeneratorMatrix {
        let m = FlipModel::ising(IsingLattice::ring(n).unwrap(), 1.0).unwrap();
        let bath = SpectralDensityModel::flat_kms(1.0, 10.0, beta).unwrap();
        build_classical_generator(&m, &build_rates(&bath, &m.bohr_frequencies(), 1.0).unwrap()).unwrap()
    }

    #[test]
    fn single_spin_at_infinite_temperature_decays_at_rate_two() {
        let g = ring(4, 0.0);
        let sg = DenseSemigroup::new(&g).unwrap();
        let f: Vec<f64> = (0..16).map(|x| if x & 1 == 1 { -1.0 } else { 1.0 }).collect();
        for t in [0.0, 0.3, 1.7] {
            assert!((sg.correlation(&f, &f, t) - (-2.0 * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn distribution_relaxes_and_conserves_mass() {
        let g = ring(5, 1.0);
        let sg = DenseSemigroup::new(&g).unwrap();
        let mut p = vec![0.0; 32];
        p[0] = 1.0;
        let early = sg.evolve_distribution(&p, 0.5);
        assert!((early.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let late = sg.evolve_distribution(&p, 40.0 / sg.eigenvalues()[1]);
        assert!(total_variation(&late, g.gibbs()) < 1e-9);
    }

    #[test]
    fn krylov_matches_dense() {
        let g = ring(8, 0.7);
        let s = g.symmetrized();
        let dense = s.to_dense();
        let (vals, vecs) = dense_eigen(&dense);
        let v: Vec<f64> = (0..256).map(|i| ((i * 37 % 11) as f64 - 5.0) / 7.0).collect();
        for t in [0.1, 2.0, 25.0] {
            let k = expm_krylov(&s, &v, t, 1e-12).unwrap();
            let c: Vec<f64> = (0..256).map(|j| vecs.column(j).iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
            for x in (0..256).step_by(17) {
                let exact: f64 = (0..256).map(|j| vecs[(x, j)] * (-t * vals[j]).exp() * c[j]).sum();
                assert!((k[x] - exact).abs() < 1e-9, "t={t} x={x}: {} vs {exact}", k[x]);
            }
        }
    }
}
