use num_complex::Complex64;
use serde::Serialize;

use super::SpectralDensityModel;
use crate::error::{Error, Result};

/// Settings of the panel-doubling oscillatory quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureOptions {
    /// Relative agreement required between successive panel doublings.
    pub rel_tol: f64,
    /// Panels per smooth segment on the first pass.
    pub initial_panels: usize,
    /// Hard cap on panels per segment.
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { rel_tol: 1e-8, initial_panels: 4, max_panels: 1 << 18 }
    }
}

/// Diagnostics attached to a computed correlation function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureInfo {
    pub options: QuadratureOptions,
    /// Largest |difference| between the last two doublings over all t.
    pub error_bound: f64,
    /// Largest panel count used by any segment.
    pub max_panels_used: usize,
    pub segments: usize,
}

/// Samples of F(t) = ∫R(ω) e^{iωt} dω on a non-negative time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationFunction {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Period of the cutoff-edge oscillation, used to form the envelope.
    pub oscillation_period: Option<f64>,
    pub quadrature: Option<QuadratureInfo>,
}

impl CorrelationFunction {
    /// Wraps externally supplied samples (no quadrature provenance).
    pub fn from_samples(times: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        validate_grid(&times)?;
        if times.len() != values.len() {
            return Err(Error::GridMismatch(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        Ok(CorrelationFunction { times, values, oscillation_period: None, quadrature: None })
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// |⟨F⟩| over one oscillation period centred near `t`. Falls back to
    /// linear interpolation of |F| when no period is attached. `None` if the
    /// window leaves the grid or holds fewer than 8 samples.
    pub fn envelope_at(&self, t: f64) -> Option<f64> {
        self.envelope_window(t).map(|(_, v)| v)
    }

    /// Like [`envelope_at`](Self::envelope_at) but also returns the centre of
    /// the window actually used. On a locally uniform grid whose spacing
    /// divides the period, the window is snapped to whole grid intervals so
    /// the trapezoid rule sees an exact period; otherwise its ends are
    /// interpolated.
    pub fn envelope_window(&self, t: f64) -> Option<(f64, f64)> {
        let n = self.times.len();
        let Some(period) = self.oscillation_period else {
            let i = self.times.partition_point(|&s| s < t);
            if i >= n {
                return None;
            }
            if self.times[i] == t || i == 0 {
                return (self.times[i] == t).then(|| (t, self.values[i].norm()));
            }
            let (t0, t1) = (self.times[i - 1], self.times[i]);
            let (f0, f1) = (self.values[i - 1].norm(), self.values[i].norm());
            return Some((t, f0 + (f1 - f0) * (t - t0) / (t1 - t0)));
        };
        let (lo, hi) = (t - 0.5 * period, t + 0.5 * period);
        if lo < self.times[0] || hi > self.times[n - 1] {
            return None;
        }
        let start = self.times.partition_point(|&s| s < lo);
        let end = self.times.partition_point(|&s| s <= hi);
        if end - start < 8 {
            return None;
        }
        if let Some(res) = self.snapped_mean(lo, period) {
            return Some(res);
        }
        let value_at = |x: f64| -> Complex64 {
            let i = self.times.partition_point(|&s| s < x).clamp(1, n - 1);
            let (t0, t1) = (self.times[i - 1], self.times[i]);
            if t1 == t0 {
                return self.values[i];
            }
            let f = (x - t0) / (t1 - t0);
            self.values[i - 1] * (1.0 - f) + self.values[i] * f
        };
        let mut nodes: Vec<(f64, Complex64)> = vec![(lo, value_at(lo))];
        nodes.extend((start..end).map(|k| (self.times[k], self.values[k])));
        nodes.push((hi, value_at(hi)));
        let mut acc = Complex64::new(0.0, 0.0);
        for w in nodes.windows(2) {
            acc += (w[0].1 + w[1].1) * (0.5 * (w[1].0 - w[0].0));
        }
        Some((t, (acc / period).norm()))
    }

    fn snapped_mean(&self, lo: f64, period: f64) -> Option<(f64, f64)> {
        let n = self.times.len();
        let k0 = self.times.partition_point(|&s| s < lo);
        if k0 + 1 >= n {
            return None;
        }
        let h = self.times[k0 + 1] - self.times[k0];
        let m = (period / h).round() as usize;
        if m < 8 || ((m as f64) * h - period).abs() > 1e-9 * period || k0 + m >= n {
            return None;
        }
        for k in k0..k0 + m {
            if ((self.times[k + 1] - self.times[k]) - h).abs() > 1e-9 * h {
                return None;
            }
        }
        let mut acc = (self.values[k0] + self.values[k0 + m]) * 0.5;
        for k in k0 + 1..k0 + m {
            acc += self.values[k];
        }
        let centre = 0.5 * (self.times[k0] + self.times[k0 + m]);
        Some((centre, (acc / m as f64).norm()))
    }
}

fn validate_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::domain("t_grid", "empty time grid"));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::domain("t_grid", "times must be finite and >= 0"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("t_grid", "times must be sorted"));
    }
    Ok(())
}

/// Moments ∫_{-h}^{h} u^k e^{iut} du for k = 0, 1, 2.
fn filon_moments(h: f64, t: f64) -> (f64, Complex64, f64) {
    let theta = h * t;
    if theta.abs() < 0.1 {
        let t2 = theta * theta;
        let t4 = t2 * t2;
        let t6 = t4 * t2;
        let t8 = t4 * t4;
        let m0 = 2.0 * h * (1.0 - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0 + t8 / 362_880.0);
        let m1 = 2.0 * h * h
            * (theta / 3.0 - theta * t2 / 30.0 + theta * t4 / 840.0 - theta * t6 / 45_360.0);
        let m2 = 2.0 * h.powi(3)
            * (1.0 / 3.0 - t2 / 10.0 + t4 / 168.0 - t6 / 6480.0 + t8 / 443_520.0);
        (m0, Complex64::new(0.0, m1), m2)
    } else {
        let (s, c) = theta.sin_cos();
        let m0 = 2.0 * s / t;
        let m1 = 2.0 * (s / (t * t) - h * c / t);
        let m2 = 2.0 * (h * h * s / t + 2.0 * h * c / (t * t) - 2.0 * s / (t * t * t));
        (m0, Complex64::new(0.0, m1), m2)
    }
}

/// One smooth segment [a, b] with cached density samples per refinement level.
struct Segment {
    a: f64,
    b: f64,
    mass: f64,
    levels: Vec<Vec<f64>>,
}

impl Segment {
    /// Fills the cache through `level`; level k holds the `2n + 1` nodes of
    /// n = initial << k panels.
    fn ensure(&mut self, model: &SpectralDensityModel, initial: usize, level: usize) {
        while self.levels.len() <= level {
            let panels = initial << self.levels.len();
            let pts = 2 * panels + 1;
            let h = (self.b - self.a) / (pts - 1) as f64;
            let v = (0..pts)
                .map(|k| {
                    let w = if k == pts - 1 { self.b } else { self.a + k as f64 * h };
                    model.evaluate(w)
                })
                .collect();
            self.levels.push(v);
        }
    }

    fn sum(&self, level: usize, t: f64) -> Complex64 {
        filon_sum(&self.levels[level], self.a, self.b, t)
    }
}

fn filon_sum(samples: &[f64], a: f64, b: f64, t: f64) -> Complex64 {
    let panels = (samples.len() - 1) / 2;
    let width = (b - a) / panels as f64;
    let h = 0.5 * width;
    let (m0, m1, m2) = filon_moments(h, t);
    let step = Complex64::from_polar(1.0, width * t);
    let mut phase = Complex64::from_polar(1.0, (a + h) * t);
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        if p % 64 == 0 && p > 0 {
            phase = Complex64::from_polar(1.0, (a + h + p as f64 * width) * t);
        }
        let (fm, f0, fp) = (samples[2 * p], samples[2 * p + 1], samples[2 * p + 2]);
        let lin = (fp - fm) / (2.0 * h);
        let quad = (fp - 2.0 * f0 + fm) / (2.0 * h * h);
        acc += phase * (m1 * lin + f0 * m0 + quad * m2);
        phase *= step;
    }
    acc
}

/// Computes F(t) = ∫R(ω) e^{iωt} dω on `t_grid`.
///
/// Each smooth piece of R (split at ω = 0, the cutoff edges and table nodes)
/// is integrated with a piecewise-quadratic Filon rule, which handles the
/// oscillatory factor exactly; panels double until two successive estimates
/// agree to `rel_tol`.
pub fn correlation_function(model: &SpectralDensityModel, t_grid: &[f64]) -> Result<CorrelationFunction> {
    correlation_function_with(model, t_grid, QuadratureOptions::default())
}

pub fn correlation_function_with(
    model: &SpectralDensityModel,
    t_grid: &[f64],
    options: QuadratureOptions,
) -> Result<CorrelationFunction> {
    validate_grid(t_grid)?;
    if options.initial_panels == 0 || options.max_panels < options.initial_panels {
        return Err(Error::domain("quadrature", "inconsistent panel limits"));
    }
    let bp = model.breakpoints();
    let mut segments: Vec<Segment> = bp
        .windows(2)
        .map(|w| Segment { a: w[0], b: w[1], mass: 0.0, levels: Vec::new() })
        .collect();
    // segment masses set the absolute floor of the convergence test
    for seg in segments.iter_mut() {
        seg.ensure(model, options.initial_panels, 0);
        seg.mass = seg.sum(0, 0.0).re.abs();
    }
    let total_mass: f64 = segments.iter().map(|s| s.mass).sum();

    let mut values = Vec::with_capacity(t_grid.len());
    let mut error_bound = 0.0_f64;
    let mut max_used = options.initial_panels;
    for &t in t_grid {
        let mut total = Complex64::new(0.0, 0.0);
        for seg in segments.iter_mut() {
            let mut level = 0usize;
            let mut prev = seg.sum(0, t);
            let mut last_change = f64::NAN;
            loop {
                level += 1;
                let panels = options.initial_panels << level;
                if panels > options.max_panels {
                    return Err(Error::numerical(
                        "correlation_function",
                        format!(
                            "no convergence at t = {t} on segment [{}, {}] after {} panels (last change {:.3e})",
                            seg.a,
                            seg.b,
                            panels >> 1,
                            last_change
                        ),
                    ));
                }
                seg.ensure(model, options.initial_panels, level);
                let next = seg.sum(level, t);
                let diff = (next - prev).norm();
                last_change = diff;
                let floor = 1e-6 * total_mass.max(f64::MIN_POSITIVE);
                prev = next;
                if diff <= options.rel_tol * next.norm().max(floor) {
                    error_bound = error_bound.max(diff);
                    max_used = max_used.max(panels);
                    break;
                }
            }
            total += prev;
        }
        values.push(total);
    }

    let oscillation_period = Some(2.0 * std::f64::consts::PI / model.cutoff());
    Ok(CorrelationFunction {
        times: t_grid.to_vec(),
        values,
        oscillation_period,
        quadrature: Some(QuadratureInfo {
            options,
            error_bound,
            max_panels_used: max_used,
            segments: segments.len(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Closed form of F(t) for the flat KMS density.
    fn flat_oracle(r: f64, cutoff: f64, beta: f64, t: f64) -> Complex64 {
        let i = Complex64::i();
        if t == 0.0 {
            return Complex64::new(r * (cutoff + (1.0 - (-beta * cutoff).exp()) / beta), 0.0);
        }
        let pos = ((i * cutoff * t).exp() - 1.0) / (i * t);
        let neg = (1.0 - (-beta * cutoff - i * cutoff * t).exp()) / (beta + i * t);
        (pos + neg) * r
    }

    #[test]
    fn moments_match_direct_formula_across_branch() {
        for &(h, t) in &[(0.1, 0.99), (0.1, 1.01), (0.3, 0.3333), (0.05, 1.9)] {
            let (a0, a1, a2) = filon_moments(h, t);
            // brute midpoint oracle
            let n = 200_000;
            let du = 2.0 * h / n as f64;
            let (mut b0, mut b1, mut b2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for k in 0..n {
                let u = -h + (k as f64 + 0.5) * du;
                let e = Complex64::from_polar(1.0, u * t) * du;
                b0 += e;
                b1 += e * u;
                b2 += e * u * u;
            }
            assert!((Complex64::new(a0, 0.0) - b0).norm() < 1e-9);
            assert!((a1 - b1).norm() < 1e-9);
            assert!((Complex64::new(a2, 0.0) - b2).norm() < 1e-9);
        }
    }

    #[test]
    fn flat_density_at_zero() {
        let m = SpectralDensityModel::flat_kms(1.0, 10.0, 1.0).unwrap();
        let f = correlation_function(&m, &[0.0]).unwrap();
        let expected = 10.0 + (1.0 - (-10.0f64).exp());
        assert_relative_eq!(f.values[0].re, expected, max_relative = 1e-6);
        assert_relative_eq!(f.values[0].re, 10.99995, epsilon = 1e-5);
        assert_eq!(f.values[0].im, 0.0);
    }

    #[test]
    fn flat_density_matches_closed_form() {
        let m = SpectralDensityModel::flat_kms(1.0, 10.0, 1.0).unwrap();
        let grid: Vec<f64> = (0..400).map(|k| k as f64 * 0.5).collect();
        let f = correlation_function(&m, &grid).unwrap();
        for (t, v) in grid.iter().zip(&f.values) {
            let exact = flat_oracle(1.0, 10.0, 1.0, *t);
            assert!((v - exact).norm() < 1e-8 * exact.norm().max(1e-3), "t={t}: {v} vs {exact}");
        }
    }

    #[test]
    fn power_ansatz_zero_time_weight() {
        // ∫_0^Ω ω² e^{-ω} dω + ∫_0^Ω ω² e^{-ω} e^{-βω} dω with Ω = 5, β = 1
        let m = SpectralDensityModel::power_ansatz(1.0, 2.0, 5.0, 1.0).unwrap();
        let f = correlation_function(&m, &[0.0]).unwrap();
        let gamma_lower = |a: f64, x: f64| -> f64 {
            // ∫_0^x ω² e^{-aω} dω
            (2.0 - (-a * x).exp() * (a * a * x * x + 2.0 * a * x + 2.0)) / a.powi(3)
        };
        let expected = gamma_lower(1.0 / 5.0, 5.0) + gamma_lower(1.0 / 5.0 + 1.0, 5.0);
        assert_relative_eq!(f.values[0].re, expected, max_relative = 1e-7);
        assert!(f.values[0].im.abs() < 1e-12);
    }

    #[test]
    fn magnitude_bounded_by_zero_time_value() {
        let m = SpectralDensityModel::power_ansatz(2.0, 1.0, 3.0, 0.5).unwrap();
        let grid: Vec<f64> = (0..300).map(|k| k as f64 * 0.1).collect();
        let f = correlation_function(&m, &grid).unwrap();
        let f0 = f.values[0].re;
        assert!(f.values.iter().all(|v| v.norm() <= f0 * (1.0 + 1e-9)));
    }

    #[test]
    fn cap_triggers_numerical_failure() {
        let m = SpectralDensityModel::power_ansatz(1.0, 2.0, 5.0, 1.0).unwrap();
        let opts = QuadratureOptions { rel_tol: 1e-15, initial_panels: 2, max_panels: 8 };
        let err = correlation_function_with(&m, &[1.0], opts).unwrap_err();
        assert!(matches!(err, Error::NumericalFailure { .. }));
    }

    #[test]
    fn rejects_unsorted_grid() {
        let m = SpectralDensityModel::flat_kms(1.0, 1.0, 1.0).unwrap();
        assert!(correlation_function(&m, &[1.0, 0.5]).is_err());
        assert!(correlation_function(&m, &[-1.0]).is_err());
    }
}
