use nalgebra::DMatrix;
use num_complex::Complex64;
use qmemlab::errormap::{evolve_support, ChainModel, PauliAxis};

type CMat = DMatrix<Complex64>;

/// exp(−iHt) by scaling and squaring a Taylor series.
fn propagator(h: &DMatrix<f64>, t: f64) -> CMat {
    let d = h.nrows();
    let norm = h.iter().map(|x| x.abs()).sum::<f64>().max(1.0) * t.abs();
    let squarings = (norm.log2().ceil().max(0.0) as u32) + 4;
    let scale = t / 2f64.powi(squarings as i32);
    let a: CMat = h.map(|x| Complex64::new(0.0, -x * scale));
    let mut u = CMat::identity(d, d);
    let mut term = CMat::identity(d, d);
    for k in 1..30 {
        term = &term * &a / Complex64::new(k as f64, 0.0);
        u += &term;
    }
    for _ in 0..squarings {
        u = &u * &u;
    }
    u
}

/// Tr(P O)/2^n for every Pauli string, by summing matrix elements.
fn brute_weights(o: &CMat, n: usize) -> Vec<f64> {
    let d = 1usize << n;
    let mut w = vec![0.0; n];
    for code in 0..4usize.pow(n as u32) {
        let labels: Vec<usize> = (0..n).map(|k| (code >> (2 * k)) & 3).collect();
        let support = labels.iter().filter(|&&l| l != 0).count();
        if support == 0 {
            continue;
        }
        let flip: usize = (0..n).filter(|&k| labels[k] == 1 || labels[k] == 2).map(|k| 1 << k).sum();
        let mut tr = Complex64::new(0.0, 0.0);
        for r in 0..d {
            let mut phase = Complex64::new(1.0, 0.0);
            for (k, &l) in labels.iter().enumerate() {
                let bit = (r >> k) & 1;
                phase *= match (l, bit) {
                    (2, 0) => Complex64::new(0.0, -1.0),
                    (2, _) => Complex64::new(0.0, 1.0),
                    (3, 1) => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(1.0, 0.0),
                };
            }
            tr += phase * o[(r ^ flip, r)];
        }
        w[support - 1] += (tr / d as f64).norm_sqr();
    }
    w
}

#[test]
fn support_spectrum_matches_dense_evolution() {
    let chain = ChainModel::new(8, 1.0, 1.0).unwrap();
    let t = 2.0;
    let u = propagator(&chain.hamiltonian(), t);
    let o: CMat = chain.site_operator(4, PauliAxis::Z).map(|x| Complex64::new(x, 0.0));
    let evolved = u.adjoint() * o * &u;
    let oracle = brute_weights(&evolved, 8);
    let spectra = evolve_support(&chain, 4, PauliAxis::Z, &[t]).unwrap();
    for (a, b) in spectra[0].weights.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-8, "{:?} vs {:?}", spectra[0].weights, oracle);
    }
    assert!((oracle.iter().sum::<f64>() - 1.0).abs() < 1e-10);
}

#[test]
fn x_operator_matches_dense_evolution() {
    let chain = ChainModel::new(5, 0.7, -1.3).unwrap();
    let t = 1.1;
    let u = propagator(&chain.hamiltonian(), t);
    let o: CMat = chain.site_operator(0, PauliAxis::X).map(|x| Complex64::new(x, 0.0));
    let oracle = brute_weights(&(u.adjoint() * o * &u), 5);
    let got = &evolve_support(&chain, 0, PauliAxis::X, &[t]).unwrap()[0].weights;
    for (a, b) in got.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10);
    }
}
