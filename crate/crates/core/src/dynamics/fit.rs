use serde::Serialize;

use super::AutocorrelationEstimate;
use crate::error::{Error, Result};

/// Log-residual floor above which a decay counts as non-exponential.
pub const NONEXPONENTIAL_RESIDUAL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub gamma: f64,
    pub stderr: f64,
    /// Fitted C at t = 0.
    pub amplitude: f64,
    /// RMS residual of log C about the line.
    pub residual: f64,
    pub points: usize,
    pub nonexponential: bool,
}

/// Weighted least squares of `log C(t)` against `t` on `[t_lo, t_hi]`.
///
/// Weights are `(C/σ)²`. If every σ vanishes the fit is unweighted and the
/// slope error comes from the scatter. The curve is flagged non-exponential
/// when the RMS log-residual exceeds both [`NONEXPONENTIAL_RESIDUAL`] and
/// three times the median log-uncertainty.
pub fn fit_decay_series(times: &[f64], values: &[f64], stderr: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != values.len() || times.len() != stderr.len() {
        return Err(Error::GridMismatch("times, values and stderr differ in length".into()));
    }
    let idx: Vec<usize> = (0..times.len()).filter(|&k| times[k] >= window.0 && times[k] <= window.1).collect();
    if idx.len() < 3 {
        return Err(Error::InsufficientData { what: "points in fit window", needed: 3, got: idx.len() });
    }
    if let Some(&k) = idx.iter().find(|&&k| !(values[k] > 0.0)) {
        return Err(Error::Window(format!("C({}) = {} is not positive", times[k], values[k])));
    }
    let floor = idx.iter().map(|&k| stderr[k]).filter(|&s| s > 0.0).fold(f64::INFINITY, f64::min);
    let weighted = floor.is_finite();
    let xs: Vec<f64> = idx.iter().map(|&k| times[k]).collect();
    let ys: Vec<f64> = idx.iter().map(|&k| values[k].ln()).collect();
    let sig: Vec<f64> = idx.iter().map(|&k| if weighted { stderr[k].max(floor) / values[k] } else { 1.0 }).collect();
    let w: Vec<f64> = sig.iter().map(|s| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(&xs).map(|(a, x)| a * x).sum::<f64>() / sw;
    let my = w.iter().zip(&ys).map(|(a, y)| a * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&xs).map(|(a, x)| a * (x - mx) * (x - mx)).sum();
    let sxy: f64 = w.iter().zip(xs.iter().zip(&ys)).map(|(a, (x, y))| a * (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - intercept - slope * x).collect();
    let n = res.len() as f64;
    let rms = (res.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    let stderr_slope = if weighted {
        (1.0 / sxx).sqrt()
    } else {
        (res.iter().map(|r| r * r).sum::<f64>() / (n - 2.0) / sxx).sqrt()
    };
    let mut sorted = sig.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let typical = if weighted { sorted[sorted.len() / 2] } else { 0.0 };
    Ok(DecayFit {
        gamma: -slope,
        stderr: stderr_slope,
        amplitude: intercept.exp(),
        residual: rms,
        points: idx.len(),
        nonexponential: rms > NONEXPONENTIAL_RESIDUAL.max(3.0 * typical),
    })
}

pub fn fit_decay_rate(est: &AutocorrelationEstimate, window: (f64, f64)) -> Result<DecayFit> {
    fit_decay_series(&est.lags, &est.values, &est.stderr, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let t: Vec<f64> = (0..40).map(|k| k as f64 * 0.25).collect();
        let c: Vec<f64> = t.iter().map(|x| (-0.5 * x).exp()).collect();
        let f = fit_decay_series(&t, &c, &vec![0.0; 40], (0.0, 10.0)).unwrap();
        assert!((f.gamma - 0.5).abs() < 1e-12);
        assert!(f.stderr < 1e-10);
        assert!(!f.nonexponential);
    }

    #[test]
    fn power_law_is_flagged() {
        let t: Vec<f64> = (1..=40).map(|k| k as f64 * 0.25).collect();
        let c: Vec<f64> = t.iter().map(|x| 1.0 / (x * x)).collect();
        let f = fit_decay_series(&t, &c, &vec![0.0; 40], (0.25, 10.0)).unwrap();
        assert!(f.nonexponential);
    }

    #[test]
    fn nonpositive_window_is_an_error() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let c = [1.0, 0.5, -0.1, 0.2];
        assert!(matches!(fit_decay_series(&t, &c, &[0.0; 4], (0.0, 3.0)), Err(Error::Window(_))));
    }
}
