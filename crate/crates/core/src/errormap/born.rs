use serde::Serialize;

use super::support::SupportSpectrum;
use crate::bath::{line_fit, CorrelationFunction};
use crate::error::{Error, Result};

/// Smallest number of nonzero sizes the exponential fit accepts.
pub const MIN_FIT_SIZES: usize = 4;
/// Coefficient of determination required for an exponential verdict.
pub const A2_MIN_R2: f64 = 0.98;
/// Sizes whose magnitude is below this fraction of the largest are treated as zero.
pub const RELATIVE_FLOOR: f64 = 1e-14;

/// Per-size error magnitudes m_n, n = 1..N.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorWeightEstimate {
    pub magnitudes: Vec<f64>,
    /// Σ_t |F(t)| Δt over the window: the total the magnitudes share.
    pub normalization: f64,
    pub fit: Option<A2Verdict>,
}

impl ErrorWeightEstimate {
    pub fn from_magnitudes(magnitudes: Vec<f64>) -> Self {
        let normalization = magnitudes.iter().sum();
        ErrorWeightEstimate { magnitudes, normalization, fit: None }
    }

    /// Sizes (1-based) with a magnitude above the relative floor.
    pub fn nonzero_sizes(&self) -> Vec<usize> {
        let top = self.magnitudes.iter().cloned().fold(0.0, f64::max);
        (0..self.magnitudes.len())
            .filter(|&k| self.magnitudes[k] > RELATIVE_FLOOR * top && self.magnitudes[k] > 0.0)
            .map(|k| k + 1)
            .collect()
    }
}

/// Result of fitting m_n ≈ C η^n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct A2Verdict {
    pub constant: f64,
    pub eta: f64,
    pub r_squared: f64,
    /// Root-mean-square residual of log m_n.
    pub residual: f64,
    pub sizes_used: usize,
    pub accepted: bool,
}

impl A2Verdict {
    pub fn label(&self) -> &'static str {
        if self.accepted {
            "exponential"
        } else {
            "a2_violating_tail"
        }
    }
}

/// Trapezoid weights of a grid.
fn trapezoid(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { times[i] - times[i - 1] } else { 0.0 };
            let right = if i + 1 < n { times[i + 1] - times[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// m_n = Σ_t |F(t)| w_n(t) Δt with trapezoid Δt. Spectrum times must
/// coincide with the correlation grid.
pub fn born_error_weights(spectra: &[SupportSpectrum], corr: &CorrelationFunction) -> Result<ErrorWeightEstimate> {
    if spectra.len() != corr.times.len() {
        return Err(Error::GridMismatch(format!("{} spectra but {} correlation samples", spectra.len(), corr.times.len())));
    }
    if spectra.len() < 2 {
        return Err(Error::InsufficientData { what: "time points", needed: 2, got: spectra.len() });
    }
    for (s, &t) in spectra.iter().zip(&corr.times) {
        if (s.time - t).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(Error::GridMismatch(format!("spectrum at t = {} against correlation at t = {t}", s.time)));
        }
    }
    let n = spectra[0].weights.len();
    if spectra.iter().any(|s| s.weights.len() != n) {
        return Err(Error::GridMismatch("spectra of different chain lengths".into()));
    }
    let dt = trapezoid(&corr.times);
    let mag = corr.magnitudes();
    let mut m = vec![0.0; n];
    for ((s, f), w) in spectra.iter().zip(&mag).zip(&dt) {
        for (mk, wk) in m.iter_mut().zip(&s.weights) {
            *mk += f * wk.max(0.0) * w;
        }
    }
    let normalization = mag.iter().zip(&dt).map(|(f, w)| f * w).sum();
    Ok(ErrorWeightEstimate { magnitudes: m, normalization, fit: None })
}

/// Least squares of log m_n against n. Accepted iff R² ≥ 0.98 and η < 1.
pub fn a2_fit(est: &ErrorWeightEstimate) -> Result<A2Verdict> {
    let sizes = est.nonzero_sizes();
    if sizes.len() < MIN_FIT_SIZES {
        return Err(Error::InsufficientData { what: "nonzero error sizes", needed: MIN_FIT_SIZES, got: sizes.len() });
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = sizes.iter().map(|&n| est.magnitudes[n - 1].ln()).collect();
    let (c0, c1, rms) = line_fit(&xs, &ys);
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res = rms * rms * ys.len() as f64;
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let eta = c1.exp();
    Ok(A2Verdict {
        constant: c0.exp(),
        eta,
        r_squared,
        residual: rms,
        sizes_used: sizes.len(),
        accepted: r_squared >= A2_MIN_R2 && eta < 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn corr(times: &[f64], f: impl Fn(f64) -> f64) -> CorrelationFunction {
        CorrelationFunction::from_samples(times.to_vec(), times.iter().map(|&t| Complex64::new(f(t), 0.0)).collect()).unwrap()
    }

    /// w_n(t) = 1 for n = ⌈vt⌉ (n ≥ 1).
    fn ballistic(times: &[f64], v: f64, n: usize) -> Vec<SupportSpectrum> {
        times
            .iter()
            .map(|&t| {
                let k = ((v * t).ceil() as usize).clamp(1, n);
                let mut w = vec![0.0; n];
                w[k - 1] = 1.0;
                SupportSpectrum { time: t, weights: w }
            })
            .collect()
    }

    #[test]
    fn synthetic_exponential_accepted() {
        let est = ErrorWeightEstimate::from_magnitudes((1..=8).map(|n| 0.1f64.powi(n)).collect());
        let v = a2_fit(&est).unwrap();
        assert!(v.accepted);
        assert!((v.eta - 0.1).abs() < 1e-12);
        assert!((v.constant - 1.0).abs() < 1e-10);
    }

    #[test]
    fn synthetic_power_law_rejected() {
        let est = ErrorWeightEstimate::from_magnitudes((1..=10).map(|n| 1.0 / (n * n) as f64).collect());
        let v = a2_fit(&est).unwrap();
        assert!(!v.accepted, "{v:?}");
        assert_eq!(v.label(), "a2_violating_tail");
    }

    #[test]
    fn growth_is_rejected_even_if_straight() {
        let est = ErrorWeightEstimate::from_magnitudes((1..=6).map(|n| 2f64.powi(n)).collect());
        assert!(!a2_fit(&est).unwrap().accepted);
    }

    #[test]
    fn too_few_sizes() {
        let est = ErrorWeightEstimate::from_magnitudes(vec![1.0, 0.1, 0.0, 0.0, 0.0]);
        assert!(matches!(a2_fit(&est), Err(Error::InsufficientData { got: 2, .. })));
    }

    #[test]
    fn delta_correlation_stays_single_site() {
        let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.01).collect();
        let spectra = ballistic(&times, 3.0, 6);
        let est = born_error_weights(&spectra, &corr(&times, |t| if t == 0.0 { 1.0 } else { 0.0 })).unwrap();
        assert!(est.magnitudes[0] > 0.0);
        assert!(est.magnitudes[1..].iter().all(|&m| m == 0.0));
    }

    #[test]
    fn change_of_variables_exponential() {
        let times: Vec<f64> = (0..=40000).map(|i| i as f64 * 2.5e-4).collect();
        let v = 1.5;
        let est = born_error_weights(&ballistic(&times, v, 12), &corr(&times, |t| (-t).exp())).unwrap();
        for n in 2..11 {
            let ratio = est.magnitudes[n] / est.magnitudes[n - 1];
            assert!((ratio - (-1.0 / v).exp()).abs() < 1e-3, "n={n} ratio={ratio}");
        }
        let fit = a2_fit(&ErrorWeightEstimate::from_magnitudes(est.magnitudes[1..11].to_vec())).unwrap();
        assert!(fit.accepted);
    }

    #[test]
    fn change_of_variables_lorentzian() {
        let times: Vec<f64> = (0..=40000).map(|i| i as f64 * 2.5e-4).collect();
        let v = 1.0;
        let est = born_error_weights(&ballistic(&times, v, 10), &corr(&times, |t| 1.0 / (1.0 + t * t))).unwrap();
        for n in 2..=10 {
            // Exact integral of 1/(1+t²) over ((n-1)/v, n/v].
            let exact = (n as f64 / v).atan() - ((n - 1) as f64 / v).atan();
            assert!((est.magnitudes[n - 1] / exact - 1.0).abs() < 2e-3, "n={n}");
            let mid = (n as f64 - 0.5) / v;
            assert!((est.magnitudes[n - 1] * (1.0 + mid * mid) * v - 1.0).abs() < 0.1);
        }
        assert!(!a2_fit(&est).unwrap().accepted);
    }

    #[test]
    fn grid_mismatch() {
        let times = vec![0.0, 0.1, 0.2];
        let spectra = ballistic(&[0.0, 0.1, 0.3], 1.0, 3);
        assert!(matches!(born_error_weights(&spectra, &corr(&times, |_| 1.0)), Err(Error::GridMismatch(_))));
        assert!(matches!(born_error_weights(&spectra[..2], &corr(&times, |_| 1.0)), Err(Error::GridMismatch(_))));
    }
}
