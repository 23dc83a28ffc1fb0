use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sparse::{axpy, dot, norm, CsrMatrix, SymmetricOperator};
use super::GeneratorMatrix;
use crate::error::{Error, Result};

/// Largest state count handled by dense diagonalization.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Dense,
    IterativeSparse,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    /// Smallest eigenvalue of −𝓛* above the zero threshold.
    pub gap: f64,
    /// Lowest eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub method: EigenMethod,
    /// Number of eigenvalues within the zero threshold.
    pub zero_multiplicity: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Krylov basis size before restart (0 picks one from `k`).
    pub basis: usize,
    /// Absolute residual target, scaled by max(1, ‖A‖).
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { basis: 0, tol: 1e-11, max_restarts: 2000, seed: 0x5eed }
    }
}

/// Eigenpairs of a symmetric operator: values ascending, unit vectors, and
/// explicit residual norms.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub method: EigenMethod,
}

fn residual(op: &dyn SymmetricOperator, lambda: f64, v: &[f64]) -> f64 {
    let mut av = vec![0.0; v.len()];
    op.apply(v, &mut av);
    axpy(-lambda, v, &mut av);
    norm(&av)
}

fn materialize(op: &dyn SymmetricOperator) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        m.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    0.5 * (&m + m.transpose())
}

/// All eigenpairs of a dense symmetric matrix, ascending.
pub fn dense_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.nrows(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for u in against {
        let c = dot(u, v);
        axpy(-c, u, v);
    }
}

/// Lowest `k` eigenpairs of `op` restricted to the orthogonal complement of
/// the orthonormal vectors `deflate`.
///
/// Thick-restart Lanczos with full reorthogonalization: after each cycle the
/// lowest Ritz vectors and the residual direction seed the next basis. A
/// single Krylov sequence sees one copy of a degenerate eigenvalue, so after
/// convergence the found vectors are deflated and a probe run looks for
/// anything lower than the current k-th value.
pub fn lowest_eigenpairs(
    op: &dyn SymmetricOperator,
    k: usize,
    deflate: &[Vec<f64>],
    opts: LanczosOptions,
) -> Result<EigenPairs> {
    let mut found = thick_restart(op, k, deflate, opts)?;
    if found.method == EigenMethod::Dense {
        return Ok(found);
    }
    let free = op.dim().saturating_sub(deflate.len());
    let mut probe_seed = opts.seed;
    while found.values.len() < free {
        let mut defl = deflate.to_vec();
        defl.extend(found.vectors.iter().cloned());
        probe_seed = probe_seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let probe = thick_restart(op, 1, &defl, LanczosOptions { seed: probe_seed, ..opts })?;
        found.iterations += probe.iterations;
        let kth = found.values[k - 1];
        let slack = 1e3 * opts.tol * kth.abs().max(1.0);
        if probe.values[0] >= kth - slack {
            break;
        }
        let at = found.values.partition_point(|&v| v <= probe.values[0]);
        found.values.insert(at, probe.values[0]);
        found.vectors.insert(at, probe.vectors[0].clone());
        found.residuals.insert(at, probe.residuals[0]);
        found.values.truncate(k);
        found.vectors.truncate(k);
        found.residuals.truncate(k);
    }
    Ok(found)
}

fn thick_restart(
    op: &dyn SymmetricOperator,
    k: usize,
    deflate: &[Vec<f64>],
    opts: LanczosOptions,
) -> Result<EigenPairs> {
    let n = op.dim();
    let free = n.saturating_sub(deflate.len());
    if k == 0 || k > free {
        return Err(Error::domain("k", format!("need 1 ≤ k ≤ {free}, got {k}")));
    }
    let m = if opts.basis > 0 { opts.basis } else { (2 * k + 40).max(60) }.min(free);
    if m <= k + 1 || n <= 64 {
        return dense_deflated(op, k, deflate);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut fresh = |basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        for _ in 0..8 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            orthogonalize(&mut v, deflate);
            orthogonalize(&mut v, basis);
            orthogonalize(&mut v, deflate);
            orthogonalize(&mut v, basis);
            let nv = norm(&v);
            if nv > 1e-8 {
                v.iter_mut().for_each(|x| *x /= nv);
                return Some(v);
            }
        }
        None
    };

    let mut basis: Vec<Vec<f64>> = vec![fresh(&[]).ok_or_else(|| Error::numerical("lanczos", "no start vector"))?];
    let mut t = DMatrix::<f64>::zeros(m, m);
    let mut kept = 0usize;
    let mut scale: f64 = 1.0;
    let mut matvecs = 0usize;
    let mut log: Vec<String> = Vec::new();
    let mut w = vec![0.0; n];
    for restart in 0..=opts.max_restarts {
        let mut last_beta = 0.0;
        for j in kept..m {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            orthogonalize(&mut w, deflate);
            let mut h = vec![0.0; j + 1];
            for _pass in 0..2 {
                for (i, u) in basis.iter().enumerate().take(j + 1) {
                    let c = dot(u, &w);
                    h[i] += c;
                    axpy(-c, u, &mut w);
                }
            }
            orthogonalize(&mut w, deflate);
            for (i, hi) in h.iter().enumerate() {
                if i >= kept || i == j || j == kept {
                    t[(i, j)] = *hi;
                    t[(j, i)] = *hi;
                }
            }
            let beta = norm(&w);
            scale = scale.max(t[(j, j)].abs() + beta);
            last_beta = beta;
            if basis.len() == j + 1 {
                if beta > 1e-12 * scale {
                    basis.push(w.iter().map(|x| x / beta).collect());
                } else {
                    // invariant subspace: continue from a fresh direction
                    last_beta = 0.0;
                    match fresh(&basis) {
                        Some(v) => basis.push(v),
                        None => break,
                    }
                }
            } else {
                basis[j + 1] = w.iter().map(|x| x / beta).collect();
            }
        }
        let dim_t = basis.len().min(m);
        let tt = t.view((0, 0), (dim_t, dim_t)).into_owned();
        let (theta, y) = dense_eigen(&tt);
        let res: Vec<f64> = (0..dim_t).map(|i| (last_beta * y[(dim_t - 1, i)]).abs()).collect();
        let tol = opts.tol * scale.max(1.0);
        let done = res[..k].iter().all(|&r| r <= tol);
        if restart % 50 == 0 || done {
            log.push(format!("restart {restart}: θ₁ = {:.12e}, worst residual {:.3e}", theta[0], res[..k].iter().fold(0.0f64, |a, &b| a.max(b))));
        }
        if done || restart == opts.max_restarts || dim_t < m {
            if !done && dim_t == m {
                return Err(Error::numerical(
                    "lanczos",
                    format!("no convergence after {restart} restarts ({matvecs} products); log: {}", log.join("; ")),
                ));
            }
            let mut values = Vec::with_capacity(k);
            let mut vectors = Vec::with_capacity(k);
            let mut residuals = Vec::with_capacity(k);
            for i in 0..k {
                let mut u = vec![0.0; n];
                for (l, b) in basis.iter().enumerate().take(dim_t) {
                    axpy(y[(l, i)], b, &mut u);
                }
                let nu = norm(&u);
                u.iter_mut().for_each(|x| *x /= nu);
                residuals.push(residual(op, theta[i], &u));
                values.push(theta[i]);
                vectors.push(u);
            }
            return Ok(EigenPairs { values, vectors, residuals, iterations: matvecs, method: EigenMethod::IterativeSparse });
        }
        // thick restart: keep the lowest Ritz vectors and the residual direction
        let p = (k + (m - k) / 2).min(m - 2);
        let next = basis[m].clone();
        let mut new_basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        for i in 0..p {
            let mut u = vec![0.0; n];
            for (l, b) in basis.iter().enumerate().take(m) {
                axpy(y[(l, i)], b, &mut u);
            }
            new_basis.push(u);
        }
        // re-orthonormalize against rounding drift
        for i in 0..p {
            let (done_part, rest) = new_basis.split_at_mut(i);
            orthogonalize(&mut rest[0], done_part);
            let nv = norm(&rest[0]);
            rest[0].iter_mut().for_each(|x| *x /= nv);
        }
        new_basis.push(next);
        t.fill(0.0);
        for i in 0..p {
            t[(i, i)] = theta[i];
            t[(i, p)] = last_beta * y[(m - 1, i)];
            t[(p, i)] = t[(i, p)];
        }
        basis = new_basis;
        kept = p;
    }
    unreachable!("loop returns on its final iteration")
}

fn dense_deflated(op: &dyn SymmetricOperator, k: usize, deflate: &[Vec<f64>]) -> Result<EigenPairs> {
    let n = op.dim();
    let mut m = materialize(op);
    // push deflated directions far above the spectrum
    if !deflate.is_empty() {
        let shift = 10.0 * (m.abs().max() * n as f64).max(1.0);
        for u in deflate {
            let uv = nalgebra::DVector::from_column_slice(u);
            m += shift * &uv * uv.transpose();
        }
    }
    let (values, vectors) = dense_eigen(&m);
    let mut out = EigenPairs { values: Vec::new(), vectors: Vec::new(), residuals: Vec::new(), iterations: 0, method: EigenMethod::Dense };
    for i in 0..k {
        let v: Vec<f64> = vectors.column(i).iter().copied().collect();
        out.residuals.push(residual(op, values[i], &v));
        out.values.push(values[i]);
        out.vectors.push(v);
    }
    Ok(out)
}

/// Lowest `k` eigenvalues of a symmetric operator, dense below
/// [`DENSE_LIMIT`] and Lanczos above.
pub fn lowest_eigenvalues(op: &dyn SymmetricOperator, k: usize, deflate: &[Vec<f64>]) -> Result<EigenPairs> {
    if op.dim() <= DENSE_LIMIT {
        dense_deflated(op, k, deflate)
    } else {
        lowest_eigenpairs(op, k, deflate, LanczosOptions::default())
    }
}

fn zero_threshold(s: &CsrMatrix) -> f64 {
    1e-9 * s.norm_bound().max(1.0)
}

/// Lowest `k` eigenvalues of `−Π^{1/2} 𝓛* Π^{−1/2}`.
pub fn spectral_gap(gen: &GeneratorMatrix, k: usize) -> Result<SpectralReport> {
    let db = gen.detailed_balance_residual();
    if db > 1e-8 {
        return Err(Error::Precondition(format!("generator violates detailed balance (residual {db:.3e})")));
    }
    let n = gen.dim();
    if n < 2 {
        return Err(Error::domain("generator", "needs at least two states"));
    }
    let k = k.clamp(2, n);
    let s = gen.symmetrized();
    let thr = zero_threshold(&s);
    let (values, residuals, iterations, method) = if n <= DENSE_LIMIT {
        let pairs = dense_deflated(&s, k, &[])?;
        (pairs.values, pairs.residuals, 0, EigenMethod::Dense)
    } else {
        // the stationary vector √π is known exactly; deflate it
        let root: Vec<f64> = gen.gibbs().iter().map(|p| p.sqrt()).collect();
        let pairs = lowest_eigenpairs(&s, k - 1, std::slice::from_ref(&root), LanczosOptions::default())?;
        let mut values = vec![0.0];
        let mut residuals = vec![residual(&s, 0.0, &root)];
        values.extend(pairs.values);
        residuals.extend(pairs.residuals);
        (values, residuals, pairs.iterations, EigenMethod::IterativeSparse)
    };
    let zero_multiplicity = values.iter().filter(|v| v.abs() <= thr).count();
    let gap = values.iter().copied().find(|&v| v > thr).unwrap_or(f64::NAN);
    Ok(SpectralReport { gap, eigenvalues: values, residuals, method, zero_multiplicity, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::SpectralDensityModel;
    use crate::davies::{build_classical_generator, build_rates, FlipModel};
    use crate::lattice::IsingLattice;

    #[test]
    fn ring_of_three_at_infinite_temperature() {
        let m = FlipModel::ising(IsingLattice::ring(3).unwrap(), 1.0).unwrap();
        let bath = SpectralDensityModel::flat_kms(1.0, 10.0, 0.0).unwrap();
        let g = build_classical_generator(&m, &build_rates(&bath, &m.bohr_frequencies(), 1.0).unwrap()).unwrap();
        let r = spectral_gap(&g, 8).unwrap();
        // parity functions of weight w have eigenvalue 2w
        let expect = [0.0, 2.0, 2.0, 2.0, 4.0, 4.0, 4.0, 6.0];
        for (a, b) in r.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((r.gap - 2.0).abs() < 1e-12);
        assert_eq!(r.zero_multiplicity, 1);
        assert!(r.residuals.iter().all(|&x| x < 1e-10));
    }

    fn path_laplacian(n: usize) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, if i == 0 || i == n - 1 { 1.0 } else { 2.0 })];
                if i > 0 {
                    r.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -1.0));
                }
                r
            })
            .collect();
        CsrMatrix::from_rows(rows)
    }

    #[test]
    fn lanczos_matches_path_spectrum() {
        let n = 400;
        let a = path_laplacian(n);
        let pairs = lowest_eigenpairs(&a, 4, &[], LanczosOptions::default()).unwrap();
        for (j, v) in pairs.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * j as f64 / n as f64).cos();
            assert!((v - exact).abs() < 1e-9, "{j}: {v} vs {exact}");
        }
        assert!(pairs.residuals.iter().all(|&r| r < 1e-8));
    }

    #[test]
    fn lanczos_with_deflation() {
        let n = 300;
        let a = path_laplacian(n);
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        let pairs = lowest_eigenpairs(&a, 2, &[ones], LanczosOptions::default()).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / n as f64).cos();
        assert!((pairs.values[0] - exact).abs() < 1e-9);
    }

    #[test]
    fn dense_and_lanczos_agree_on_degenerate_spectrum() {
        // block diagonal with repeated blocks gives exact degeneracies
        let block = path_laplacian(50);
        let n = 150;
        let rows = (0..n).map(|i| block.row(i % 50).map(|(j, v)| (j + 50 * (i / 50), v)).collect()).collect();
        let a = CsrMatrix::from_rows(rows);
        let lz = lowest_eigenpairs(&a, 5, &[], LanczosOptions::default()).unwrap();
        let dz = dense_deflated(&a, 5, &[]).unwrap();
        for (x, y) in lz.values.iter().zip(&dz.values) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }
}
