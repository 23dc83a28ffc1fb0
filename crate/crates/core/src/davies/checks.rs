use nalgebra::DMatrix;
use serde::Serialize;

use super::eigen::{dense_eigen, DENSE_LIMIT};
use super::expm::{expm_krylov, DenseSemigroup};
use super::{DaviesRateTable, GeneratorMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DbReport {
    /// ‖W π‖₁ (D1).
    pub stationarity_residual: f64,
    /// Largest relative pairwise flux mismatch (D3).
    pub detailed_balance_residual: f64,
    /// Largest |A_xy − A_yx| of the Gibbs-symmetrized generator.
    pub self_adjointness_residual: f64,
    pub column_sum_residual: f64,
}

impl DbReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.stationarity_residual < tol
            && self.detailed_balance_residual < tol
            && self.self_adjointness_residual < tol
            && self.column_sum_residual < tol
    }
}

pub fn check_db_stationarity(gen: &GeneratorMatrix) -> DbReport {
    DbReport {
        stationarity_residual: gen.stationarity_residual(),
        detailed_balance_residual: gen.detailed_balance_residual(),
        self_adjointness_residual: gen.symmetrized().asymmetry(),
        column_sum_residual: gen.column_sum_residual(),
    }
}

/// ⟨f, g⟩_β for real observables.
pub fn gibbs_inner(gen: &GeneratorMatrix, f: &[f64], g: &[f64]) -> f64 {
    gen.gibbs().iter().zip(f.iter().zip(g)).map(|(p, (a, b))| p * a * b).sum()
}

/// Shifts `f` to zero Gibbs mean and scales it to unit Gibbs norm.
pub fn normalize_zero_mean(gen: &GeneratorMatrix, f: &[f64]) -> Result<Vec<f64>> {
    let mean: f64 = gen.gibbs().iter().zip(f).map(|(p, a)| p * a).sum();
    let g: Vec<f64> = f.iter().map(|a| a - mean).collect();
    let nrm = gibbs_inner(gen, &g, &g).sqrt();
    if !(nrm > 1e-300) {
        return Err(Error::Precondition("observable is constant; cannot normalize".into()));
    }
    Ok(g.iter().map(|a| a / nrm).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub times: Vec<f64>,
    /// ⟨R, e^{t𝓛*} R⟩_β.
    pub autocorrelation: Vec<f64>,
    /// exp(t⟨R, 𝓛*R⟩_β).
    pub bound: Vec<f64>,
    pub matrix_element: f64,
    pub min_slack: f64,
}

/// Checks `⟨R, e^{t𝓛*}R⟩_β ≥ exp(t⟨R, 𝓛*R⟩_β)` on `times`.
pub fn convexity_bound_check(gen: &GeneratorMatrix, r: &[f64], times: &[f64]) -> Result<ConvexityReport> {
    if r.len() != gen.dim() {
        return Err(Error::domain("observable", format!("length {} for {} states", r.len(), gen.dim())));
    }
    let mean: f64 = gen.gibbs().iter().zip(r).map(|(p, a)| p * a).sum();
    let nrm = gibbs_inner(gen, r, r);
    if mean.abs() > 1e-10 || (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("need ⟨R⟩ = 0 and ‖R‖ = 1, got mean {mean:.3e}, norm² {nrm:.12}")));
    }
    if times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::domain("t_grid", "times must be ≥ 0"));
    }
    let mut lr = vec![0.0; r.len()];
    gen.apply_observable(r, &mut lr);
    let element = gibbs_inner(gen, r, &lr);
    let autocorrelation = if gen.dim() <= DENSE_LIMIT {
        DenseSemigroup::new(gen)?.correlation_series(r, r, times)
    } else {
        let s = gen.symmetrized();
        let v: Vec<f64> = r.iter().zip(gen.gibbs()).map(|(a, p)| a * p.sqrt()).collect();
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let w = expm_krylov(&s, &v, t, 1e-13)?;
            out.push(w.iter().zip(&v).map(|(a, b)| a * b).sum());
        }
        out
    };
    let bound: Vec<f64> = times.iter().map(|t| (t * element).exp()).collect();
    let min_slack = autocorrelation.iter().zip(&bound).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
    Ok(ConvexityReport { times: times.to_vec(), autocorrelation, bound, matrix_element: element, min_slack })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapInequalityReport {
    /// −⟨A, 𝓛*A⟩_β.
    pub lhs: f64,
    /// 2·max R·Σ_α ⟨[S_α, A], [S_α, A]⟩_β.
    pub rhs: f64,
    pub slack: f64,
}

/// Evaluates both sides of the commutator bound on the dissipation of a
/// diagonal observable; the couplings S_α are the generator's flip moves.
pub fn gap_inequality_check(gen: &GeneratorMatrix, rates: &DaviesRateTable, a: &[f64]) -> Result<GapInequalityReport> {
    let flips = gen.flips().ok_or_else(|| Error::Precondition("generator carries no coupling structure".into()))?;
    if a.len() != gen.dim() {
        return Err(Error::domain("observable", format!("length {} for {} states", a.len(), gen.dim())));
    }
    let mut la = vec![0.0; a.len()];
    gen.apply_observable(a, &mut la);
    let lhs = -gibbs_inner(gen, a, &la);
    let mut commutators = 0.0;
    for (x, p) in gen.gibbs().iter().enumerate() {
        for alpha in 0..flips.n_couplings() {
            let d = a[flips.target(x, alpha)] - a[x];
            commutators += p * d * d;
        }
    }
    let rhs = 2.0 * rates.max_rate() * commutators;
    Ok(GapInequalityReport { lhs, rhs, slack: rhs - lhs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSquaredVerdict {
    /// Smallest eigenvalue of K² − cK.
    pub condition_min_eigenvalue: f64,
    pub condition_holds: bool,
    /// Smallest eigenvalue of K above 10⁻⁹·max(1, ‖K‖).
    pub gap: Option<f64>,
    /// `condition_holds ⇒ gap ≥ c` (vacuously true when the condition fails).
    pub gap_bound_verified: bool,
}

/// Checks `K² ≥ cK` and, when it holds, that the nonzero spectrum of K
/// lies at or above c.
pub fn k_squared_gap_bound(k: &DMatrix<f64>, c: f64) -> Result<KSquaredVerdict> {
    if !k.is_square() {
        return Err(Error::domain("K", "matrix must be square"));
    }
    let scale = k.abs().max().max(1.0);
    if (k - k.transpose()).abs().max() > 1e-12 * scale {
        return Err(Error::domain("K", "matrix must be symmetric"));
    }
    if !(c > 0.0) {
        return Err(Error::domain("c", format!("must be > 0, got {c}")));
    }
    let (kv, _) = dense_eigen(k);
    if kv.first().is_some_and(|&v| v < -1e-10 * scale) {
        return Err(Error::domain("K", "matrix must be positive semidefinite"));
    }
    let cond = k * k - c * k;
    let (cv, _) = dense_eigen(&(0.5 * (&cond + cond.transpose())));
    let condition_min_eigenvalue = cv.first().copied().unwrap_or(0.0);
    let condition_holds = condition_min_eigenvalue >= -1e-10 * scale * scale;
    let gap = kv.iter().copied().find(|&v| v > 1e-9 * scale);
    let gap_bound_verified = !condition_holds || gap.is_none_or(|g| g >= c * (1.0 - 1e-9));
    Ok(KSquaredVerdict { condition_min_eigenvalue, condition_holds, gap, gap_bound_verified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::SpectralDensityModel;
    use crate::davies::{build_classical_generator, build_rates, FlipModel};
    use crate::lattice::IsingLattice;

    fn ring(n: usize, beta: f64) -> (GeneratorMatrix, DaviesRateTable) {
        let m = FlipModel::ising(IsingLattice::ring(n).unwrap(), 1.0).unwrap();
        let bath = SpectralDensityModel::flat_kms(1.0, 10.0, beta).unwrap();
        let t = build_rates(&bath, &m.bohr_frequencies(), 1.0).unwrap();
        (build_classical_generator(&m, &t).unwrap(), t)
    }

    #[test]
    fn beta_zero_uniform_is_stationary() {
        let (g, _) = ring(5, 0.0);
        let r = check_db_stationarity(&g);
        assert!(r.passes(1e-12));
        assert!(g.gibbs().iter().all(|&p| (p - 1.0 / 32.0).abs() < 1e-16));
    }

    #[test]
    fn convexity_equality_at_origin_and_on_eigenvectors() {
        let (g, _) = ring(4, 0.0);
        // magnetization of one site is an eigenvector with eigenvalue −2
        let f: Vec<f64> = (0..16).map(|x| if x & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let f = normalize_zero_mean(&g, &f).unwrap();
        let rep = convexity_bound_check(&g, &f, &[0.0, 0.5, 2.0]).unwrap();
        assert!((rep.matrix_element + 2.0).abs() < 1e-12);
        assert!(rep.min_slack.abs() < 1e-12);
    }

    #[test]
    fn convexity_rejects_biased_observable() {
        let (g, _) = ring(4, 1.0);
        assert!(matches!(convexity_bound_check(&g, &vec![1.0; 16], &[1.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn gap_inequality_identity_and_single_spin() {
        let (g, t) = ring(4, 1.0);
        let rep = gap_inequality_check(&g, &t, &vec![1.0; 16]).unwrap();
        assert_eq!((rep.lhs, rep.rhs), (0.0, 0.0));
        let f: Vec<f64> = (0..16).map(|x| if x & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let rep = gap_inequality_check(&g, &t, &f).unwrap();
        assert!(rep.lhs > 0.0 && rep.slack > 0.0);
        // dense oracle: −⟨A, 𝓛*A⟩ = ½ Σ π_x q(x→y) (ΔA)²
        let mut oracle = 0.0;
        for x in 0..16 {
            for (y, q) in g.transitions(x) {
                oracle += 0.5 * g.gibbs()[x] * q * (f[y] - f[x]).powi(2);
            }
        }
        assert!((rep.lhs - oracle).abs() < 1e-14);
    }

    #[test]
    fn k_squared_examples() {
        let k = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0, 2.0]));
        let v = k_squared_gap_bound(&k, 1.0).unwrap();
        assert!(v.condition_holds && v.gap_bound_verified);
        assert_eq!(v.gap, Some(1.0));
        let k = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 0.5]));
        let v = k_squared_gap_bound(&k, 1.0).unwrap();
        assert!(!v.condition_holds);
        assert!((v.condition_min_eigenvalue + 0.25).abs() < 1e-15);
        assert!(k_squared_gap_bound(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]), 1.0).is_err());
    }
}
