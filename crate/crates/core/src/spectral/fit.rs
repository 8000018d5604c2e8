use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};

/// `amplitude·(w/2)²/((ω − center)² + (w/2)²) + baseline`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorentzFit {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub baseline: f64,
    /// ∫ of the Lorentzian part, π·amplitude·fwhm/2.
    pub area: f64,
    /// RMS residual relative to the peak value in the window.
    pub relative_residual: f64,
}

impl LorentzFit {
    pub fn eval(&self, omega: f64) -> f64 {
        let q = self.fwhm / 2.0;
        let d = omega - self.center;
        self.amplitude * q * q / (d * d + q * q) + self.baseline
    }
}

const MAX_RELATIVE_RESIDUAL: f64 = 0.05;
const STEP_TOLERANCE: f64 = 1e-9;
const MIN_PROMINENCE: f64 = 0.01;
const MAX_ITERATIONS: usize = 500;

/// Local maxima inside `v` whose prominence exceeds 1% of the value range.
fn prominent_maxima(v: &[f64]) -> Vec<usize> {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let range = hi - lo;
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < v.len() {
        if v[i] > v[i - 1] {
            // walk across a flat top
            let mut j = i;
            while j + 1 < v.len() && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < v.len() && v[j + 1] < v[i] {
                let left_min = v[..i].iter().copied().fold(f64::INFINITY, f64::min);
                let right_min = v[j + 1..].iter().copied().fold(f64::INFINITY, f64::min);
                if v[i] - left_min.max(right_min) > MIN_PROMINENCE * range {
                    peaks.push(i);
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

fn half_max_crossing(x: &[f64], y: &[f64], peak: usize, half: f64, step: isize) -> Option<f64> {
    let mut i = peak as isize;
    while i + step >= 0 && ((i + step) as usize) < y.len() {
        let j = (i + step) as usize;
        let k = i as usize;
        if y[j] <= half {
            let t = (y[k] - half) / (y[k] - y[j]);
            return Some(x[k] + t * (x[j] - x[k]));
        }
        i += step;
    }
    None
}

/// Least-squares Lorentzian plus constant baseline over the points in `window`.
///
/// Levenberg-Marquardt in coordinates scaled by the initial width estimate,
/// started from the peak location and its half-maximum crossings.
pub fn fit_lorentzian(omega: &[f64], values: &[f64], window: (f64, f64)) -> Result<LorentzFit> {
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let (x, y): (Vec<f64>, Vec<f64>) = omega
        .iter()
        .zip(values)
        .filter(|(w, _)| **w >= lo && **w <= hi)
        .map(|(w, v)| (*w, *v))
        .unzip();
    if x.len() < 8 {
        return Err(Error::FitFailure(format!(
            "only {} points in window [{lo:e}, {hi:e}]",
            x.len()
        )));
    }
    let peaks = prominent_maxima(&y);
    let peak = match peaks.as_slice() {
        [] => return Err(Error::FitFailure("no peak in window".into())),
        [p] => *p,
        many => {
            return Err(Error::FitFailure(format!(
                "{} peaks in window; expected exactly one",
                many.len()
            )))
        }
    };

    let base0 = y.iter().copied().fold(f64::INFINITY, f64::min);
    let amp0 = y[peak] - base0;
    let half = base0 + amp0 / 2.0;
    let left = half_max_crossing(&x, &y, peak, half, -1);
    let right = half_max_crossing(&x, &y, peak, half, 1);
    let width0 = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (x[peak] - l),
        (None, Some(r)) => 2.0 * (r - x[peak]),
        (None, None) => (hi - lo) / 2.0,
    };
    if !(width0 > 0.0) || !(amp0 > 0.0) {
        return Err(Error::FitFailure("degenerate initial estimate".into()));
    }
    let center0 = x[peak];

    let xs: Vec<f64> = x.iter().map(|w| (w - center0) / width0).collect();
    let ys: Vec<f64> = y.iter().map(|v| v / amp0).collect();
    // p = [x0, width, amplitude, baseline] in scaled units
    let mut p = Vector4::new(0.0, 1.0, 1.0, base0 / amp0);

    let residuals = |p: &Vector4<f64>| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let q = p[1] / 2.0;
                let d = x - p[0];
                let r = p[2] * q * q / (d * d + q * q) + p[3] - y;
                r * r
            })
            .sum()
    };

    let mut cost = residuals(&p);
    let mut mu = 1e-3;
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        let q = p[1] / 2.0;
        for (&x, &y) in xs.iter().zip(&ys) {
            let d = x - p[0];
            let den = d * d + q * q;
            let lor = q * q / den;
            let r = p[2] * lor + p[3] - y;
            let j = Vector4::new(
                p[2] * q * q * 2.0 * d / (den * den),
                p[2] * q * d * d / (den * den),
                lor,
                1.0,
            );
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut lhs = jtj;
            for k in 0..4 {
                lhs[(k, k)] += mu * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = lhs.lu().solve(&(-jtr)) else {
                mu *= 10.0;
                continue;
            };
            let trial = p + step;
            let trial_cost = residuals(&trial);
            if trial_cost.is_finite() && trial_cost <= cost {
                let scale = Vector4::new(p[1].abs(), p[1].abs(), p[2].abs(), p[2].abs());
                let rel = step
                    .iter()
                    .zip(scale.iter())
                    .map(|(s, c)| s.abs() / c.max(1e-300))
                    .fold(0.0, f64::max);
                p = trial;
                cost = trial_cost;
                mu = (mu / 3.0).max(1e-12);
                accepted = true;
                if rel < STEP_TOLERANCE {
                    converged = true;
                }
                break;
            }
            mu *= 10.0;
        }
        if converged || !accepted {
            // A rejected step at tiny cost is a converged fit.
            converged = converged || cost.sqrt() < 1e-12 * (ys.len() as f64).sqrt();
            break;
        }
    }
    if !converged && !(cost.sqrt() / (ys.len() as f64).sqrt() < 1e-6) {
        return Err(Error::FitFailure("least squares did not converge".into()));
    }

    let center = center0 + p[0] * width0;
    let fwhm = p[1].abs() * width0;
    let amplitude = p[2] * amp0;
    let baseline = p[3] * amp0;
    let peak_value = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let relative_residual = (cost / ys.len() as f64).sqrt() * amp0 / peak_value;
    if !(relative_residual <= MAX_RELATIVE_RESIDUAL) {
        return Err(Error::FitFailure(format!(
            "residual {:.1}% of peak exceeds {:.0}%",
            100.0 * relative_residual,
            100.0 * MAX_RELATIVE_RESIDUAL
        )));
    }
    Ok(LorentzFit {
        center,
        fwhm,
        amplitude,
        baseline,
        area: std::f64::consts::PI * amplitude * fwhm / 2.0,
        relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentz(w: f64, c: f64, fwhm: f64, amp: f64, base: f64) -> f64 {
        let q = fwhm / 2.0;
        amp * q * q / ((w - c).powi(2) + q * q) + base
    }

    #[test]
    fn recovers_exact_lorentzian() {
        let (c, fwhm, amp, base) = (6.9e6, 44.0, 3.2e-4, 1.1e-6);
        let x: Vec<f64> = (0..801).map(|i| c - 400.0 + i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&w| lorentz(w, c, fwhm, amp, base)).collect();
        let fit = fit_lorentzian(&x, &y, (c - 300.0, c + 300.0)).unwrap();
        assert!(((fit.center - c) / fwhm).abs() < 1e-6);
        assert!((fit.fwhm / fwhm - 1.0).abs() < 1e-6);
        assert!((fit.amplitude / amp - 1.0).abs() < 1e-6);
        let area = std::f64::consts::PI * amp * fwhm / 2.0;
        assert!((fit.area / area - 1.0).abs() < 1e-6);
    }

    #[test]
    fn off_center_window() {
        let x: Vec<f64> = (0..400).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|&w| lorentz(w, 7.3, 0.8, 2.0, 0.0)).collect();
        let fit = fit_lorentzian(&x, &y, (5.0, 12.0)).unwrap();
        assert!((fit.center - 7.3).abs() < 1e-6);
        assert!((fit.fwhm - 0.8).abs() < 1e-6);
    }

    #[test]
    fn two_peaks_rejected() {
        let x: Vec<f64> = (0..600).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&w| lorentz(w, 2.5, 0.3, 1.0, 0.0) + lorentz(w, 3.5, 0.3, 0.8, 0.0))
            .collect();
        let err = fit_lorentzian(&x, &y, (0.0, 6.0)).unwrap_err();
        assert!(matches!(err, Error::FitFailure(_)));
        assert!(err.to_string().contains("2 peaks"));
    }

    #[test]
    fn monotone_window_has_no_peak() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&w| w * w).collect();
        assert!(fit_lorentzian(&x, &y, (0.0, 99.0)).is_err());
    }

    #[test]
    fn non_lorentzian_shape_rejected() {
        let x: Vec<f64> = (0..400).map(|i| i as f64 * 0.01 - 2.0).collect();
        // triangle with a pedestal step: badly described by one Lorentzian
        let y: Vec<f64> = x
            .iter()
            .map(|&w| (1.0 - w.abs()).max(0.0) + if w > 0.5 { 0.6 } else { 0.0 })
            .collect();
        assert!(fit_lorentzian(&x, &y, (-2.0, 2.0)).is_err());
    }
}
