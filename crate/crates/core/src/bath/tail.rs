use serde::Serialize;

use super::CorrelationFunction;
use crate::error::{Error, Result};

/// RMS log-residual above which a power-law tail is rejected.
pub const POWER_LAW_RESIDUAL_THRESHOLD: f64 = 0.05;

/// Minimum number of envelope points inside the fit window.
pub const MIN_TAIL_POINTS: usize = 8;

/// Number of envelope points sampled across a window when an oscillation
/// period is attached.
const ENVELOPE_POINTS: usize = 48;

/// Result of fitting `|F(t)| ≈ a / t^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub exponent: f64,
    pub amplitude: f64,
    /// RMS residual of the log–log fit.
    pub residual: f64,
    pub points: usize,
    pub power_law: bool,
}

/// Least-squares line `y = c0 + c1 x`; returns (c0, c1, rms residual).
pub(crate) fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    (intercept, slope, (ss / n).sqrt())
}

/// Fits the power-law tail of a correlation function on `[t_min, t_max]`.
///
/// When the correlation carries an oscillation period (it does for densities
/// with a sharp cutoff, whose edges add an `e^{iΩt}/t` ripple), the fitted
/// quantity is the period-averaged magnitude at log-spaced centres;
/// otherwise the raw samples `|F(t)|` inside the window are used.
pub fn tail_fit(corr: &CorrelationFunction, t_min: f64, t_max: f64) -> Result<TailFit> {
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(Error::domain("window", format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]")));
    }
    let (first, last) = (corr.times[0], corr.times[corr.times.len() - 1]);
    if t_min < first || t_max > last {
        return Err(Error::domain(
            "window",
            format!("[{t_min}, {t_max}] is outside the grid [{first}, {last}]"),
        ));
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    match corr.oscillation_period {
        Some(period) => {
            let cutoff = 2.0 * std::f64::consts::PI / period;
            if t_min * cutoff < 20.0 {
                return Err(Error::Precondition(format!(
                    "t_min·Ω = {:.3} < 20: window starts inside the transient",
                    t_min * cutoff
                )));
            }
            let lo = t_min + 0.5 * period;
            let hi = t_max - 0.5 * period;
            if hi > lo {
                let ratio = (hi / lo).ln();
                for k in 0..ENVELOPE_POINTS {
                    let t = lo * (ratio * k as f64 / (ENVELOPE_POINTS - 1) as f64).exp();
                    if let Some(p) = corr.envelope_window(t.min(hi)) {
                        points.push(p);
                    }
                }
            }
        }
        None => {
            points.extend(
                corr.times
                    .iter()
                    .zip(&corr.values)
                    .filter(|(t, _)| **t >= t_min && **t <= t_max)
                    .map(|(t, v)| (*t, v.norm())),
            );
        }
    }
    points.retain(|p| p.1 > 0.0);
    if points.len() < MIN_TAIL_POINTS {
        return Err(Error::InsufficientData { what: "tail window points", needed: MIN_TAIL_POINTS, got: points.len() });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (intercept, slope, residual) = line_fit(&xs, &ys);
    Ok(TailFit {
        exponent: -slope,
        amplitude: intercept.exp(),
        residual,
        points: points.len(),
        power_law: residual <= POWER_LAW_RESIDUAL_THRESHOLD,
    })
}

/// Uniform grid on `[t_min, t_max]` fine enough for [`tail_fit`]: at least
/// `per_period` samples per cutoff period.
pub fn tail_grid(cutoff: f64, t_min: f64, t_max: f64, per_period: usize) -> Vec<f64> {
    let period = 2.0 * std::f64::consts::PI / cutoff;
    let dt = period / per_period as f64;
    let n = ((t_max - t_min) / dt).ceil() as usize;
    (0..=n).map(|k| (t_min + k as f64 * dt).min(t_max)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{correlation_function, SpectralDensityModel};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn recovers_exact_power_law() {
        let times: Vec<f64> = (0..50).map(|k| 20.0 + k as f64 * 4.0).collect();
        let values = times.iter().map(|t| Complex64::new(3.0 / (t * t), 0.0)).collect();
        let corr = CorrelationFunction::from_samples(times, values).unwrap();
        let fit = tail_fit(&corr, 20.0, 200.0).unwrap();
        assert_relative_eq!(fit.exponent, 2.0, epsilon = 1e-10);
        assert_relative_eq!(fit.amplitude, 3.0, epsilon = 1e-9);
        assert!(fit.power_law);
    }

    #[test]
    fn flags_exponential_decay() {
        let times: Vec<f64> = (0..=40).map(|k| 20.0 + k as f64 * 0.5).collect();
        let values = times.iter().map(|t| Complex64::new((-t).exp(), 0.0)).collect();
        let corr = CorrelationFunction::from_samples(times, values).unwrap();
        let fit = tail_fit(&corr, 20.0, 40.0).unwrap();
        assert!(fit.residual > POWER_LAW_RESIDUAL_THRESHOLD);
        assert!(!fit.power_law);
    }

    #[test]
    fn too_few_points() {
        let times: Vec<f64> = (0..5).map(|k| 20.0 + k as f64).collect();
        let values = times.iter().map(|t| Complex64::new(1.0 / t, 0.0)).collect();
        let corr = CorrelationFunction::from_samples(times, values).unwrap();
        let err = tail_fit(&corr, 20.0, 24.0).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { .. }));
    }

    #[test]
    fn flat_kms_thermal_tail() {
        let m = SpectralDensityModel::flat_kms(1.0, 10.0, 1.0).unwrap();
        let grid = tail_grid(10.0, 20.0, 200.0, 32);
        let corr = correlation_function(&m, &grid).unwrap();
        let fit = tail_fit(&corr, 20.0, 200.0).unwrap();
        assert!((1.8..=2.2).contains(&fit.exponent), "p = {}", fit.exponent);
        assert!((fit.amplitude - 1.0).abs() <= 0.3, "a = {}", fit.amplitude);
        let env = corr.envelope_at(50.0).unwrap();
        assert!((env - 4e-4).abs() <= 0.25 * 4e-4, "envelope(50) = {env}");
    }

    #[test]
    fn transient_window_rejected() {
        let m = SpectralDensityModel::flat_kms(1.0, 10.0, 1.0).unwrap();
        let grid = tail_grid(10.0, 1.0, 20.0, 16);
        let corr = correlation_function(&m, &grid).unwrap();
        assert!(matches!(tail_fit(&corr, 1.0, 20.0), Err(Error::Precondition(_))));
    }
}
