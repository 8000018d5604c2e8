//! Exact frequency-domain solution of a [`DriftModel`].
//!
//! With the convention `O(ω) = ∫dt e^{iωt} O(t)`, the Langevin equations
//! become `(−iω − A) v(ω) = B ξ(ω)`, so `v = χ(ω) B ξ` with
//! `χ(ω) = (−iω − A)⁻¹`. Position spectra follow by contracting the input
//! correlations `D` through `χ`; occupations by integrating them.

mod fit;
mod grid;

pub use fit::{fit_lorentzian, LorentzFit};
pub use grid::{Anchor, FrequencyGrid, GridConfig};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::analytics;
use crate::error::{Error, Result};
use crate::model::{effective_temperature, DriftModel, ModeName, SystemSpec};

/// Normwise backward error allowed for `(−iω − A) χ = I`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Tail mass beyond the grid, as a fraction of the integral, that triggers a coverage error.
pub const MAX_TAIL_FRACTION: f64 = 0.01;
/// Relative quadrature error estimate allowed for integrated occupations.
pub const MAX_QUADRATURE_ERROR: f64 = 1e-3;
/// Pre-clip negative values below `-NEGATIVE_TOLERANCE · max` are counted.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;
/// Fraction of counted negative points that fails a spectrum.
pub const MAX_NEGATIVE_FRACTION: f64 = 1e-4;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn resolvent(model: &DriftModel, omega: f64) -> DMatrix<Complex64> {
    let n = model.dimension();
    let mut m = -&model.drift;
    for i in 0..n {
        m[(i, i)] -= I * omega;
    }
    m
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn singular_error(model: &DriftModel, omega: f64) -> Error {
    let target = -I * omega;
    let eigenvalue = crate::model::stability_eigenvalues(model)
        .ok()
        .and_then(|eig| {
            eig.into_iter()
                .min_by(|x, y| (x - target).norm().total_cmp(&(y - target).norm()))
        })
        .unwrap_or(target);
    Error::Singular { omega, eigenvalue }
}

/// `χ(ω) = (−iωI − A)⁻¹` by dense LU, with a backward-error check
/// `‖(−iωI − A)χ − I‖ / (‖−iωI − A‖ ‖χ‖) ≤ RESIDUAL_TOLERANCE`.
pub fn susceptibility_matrix(model: &DriftModel, omega: f64) -> Result<DMatrix<Complex64>> {
    let m = resolvent(model, omega);
    let chi = m
        .clone()
        .lu()
        .try_inverse()
        .filter(|x| x.iter().all(|z| z.is_finite()))
        .ok_or_else(|| singular_error(model, omega))?;
    let residual = susceptibility_residual(&m, &chi);
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(Error::Residual {
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok(chi)
}

/// Normwise relative residual of a computed inverse.
pub fn susceptibility_residual(m: &DMatrix<Complex64>, chi: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let r = m * chi - DMatrix::<Complex64>::identity(n, n);
    frobenius(&r) / (frobenius(m) * frobenius(chi))
}

/// Resonances of the model as grid anchors. The rotating-wave model also
/// responds at the mirrored frequencies through its `n̄` correlators.
pub fn model_anchors(model: &DriftModel) -> Result<Vec<Anchor>> {
    let eig = crate::model::stability_eigenvalues(model)?;
    let mut anchors = Vec::new();
    for e in eig {
        let a = Anchor {
            center: -e.im,
            linewidth: -2.0 * e.re,
        };
        anchors.push(a);
        if model.mirror_correlations.is_some() {
            anchors.push(Anchor {
                center: -a.center,
                ..a
            });
        }
    }
    anchors.sort_by(|x, y| x.center.total_cmp(&y.center));
    anchors.dedup_by(|b, a| {
        (b.center - a.center).abs() <= 1e-12 * a.center.abs().max(a.linewidth)
            && (b.linewidth - a.linewidth).abs() <= 1e-9 * a.linewidth
    });
    Ok(anchors)
}

impl FrequencyGrid {
    /// Grid densified around every resonance of `model`.
    pub fn for_model(model: &DriftModel, config: &GridConfig) -> Result<Self> {
        model.ensure_stable()?;
        FrequencyGrid::around(&model_anchors(model)?, config)
    }
}

/// Integrated position variance of a spectrum, with error estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccupationEstimate {
    pub n_eff: f64,
    /// ⟨x²⟩ = (1/2π)∫S_xx dω, tails included.
    pub position_variance: f64,
    /// Relative error estimate from the trapezoid rule on alternate points.
    pub quadrature_error: f64,
    /// Analytic tail beyond the grid ends as a fraction of the total.
    pub tail_fraction: f64,
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Tail beyond `x[end]` for a `K/(x − c)²` decay fitted through the last two points.
fn tail(x0: f64, y0: f64, x1: f64, y1: f64, fallback_center: f64) -> f64 {
    if y0 <= 0.0 {
        return 0.0;
    }
    // x0 is the end point, x1 its inner neighbour.
    let r = (y1 / y0).sqrt();
    let center = if y1 > y0 && (r - 1.0).abs() > 1e-12 {
        (r * x0 - x1) / (r - 1.0)
    } else {
        fallback_center
    };
    let outward = (x0 - x1).signum();
    let dist = (x0 - center) * outward;
    if dist > 0.0 {
        y0 * dist
    } else {
        y0 * (x0 - fallback_center).abs()
    }
}

/// `n_eff = ⟨x²⟩/2 − 1/2` with `⟨x²⟩ = (1/2π)∫S_xx dω` by trapezoidal
/// quadrature plus an inverse-square tail correction at both ends.
///
/// The trapezoid sums on the full grid and on every other point are combined
/// by Richardson extrapolation; their difference is the reported error estimate.
pub fn integrate_occupation(
    omega: &[f64],
    values: &[f64],
    omega_center: f64,
) -> Result<OccupationEstimate> {
    if omega.len() != values.len() || omega.len() < 5 {
        return Err(Error::Grid(
            "need at least five matching frequency/value pairs".into(),
        ));
    }
    let n = omega.len();
    let fine = trapezoid(omega, values);
    let (cx, cy): (Vec<f64>, Vec<f64>) = (0..n)
        .filter(|&i| i % 2 == 0 || i == n - 1)
        .map(|i| (omega[i], values[i]))
        .unzip();
    let coarse = trapezoid(&cx, &cy);

    let left = tail(omega[0], values[0], omega[1], values[1], omega_center);
    let right = tail(
        omega[n - 1],
        values[n - 1],
        omega[n - 2],
        values[n - 2],
        omega_center,
    );
    // Trapezoid on the full grid, extrapolated against the alternate-point rule.
    let total = fine + (fine - coarse) / 3.0 + left + right;
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Grid(
            "spectrum integrates to a non-positive value".into(),
        ));
    }
    let tail_fraction = (left + right) / total;
    if tail_fraction > MAX_TAIL_FRACTION {
        let reach = (omega[0] - omega_center)
            .abs()
            .max((omega[n - 1] - omega_center).abs());
        return Err(Error::Coverage {
            tail_fraction,
            required_span: reach * tail_fraction / MAX_TAIL_FRACTION,
            center: omega_center,
        });
    }
    let quadrature_error = (fine - coarse).abs() / 3.0 / total;
    if quadrature_error > MAX_QUADRATURE_ERROR {
        return Err(Error::Quadrature {
            estimate: quadrature_error,
            tolerance: MAX_QUADRATURE_ERROR,
        });
    }
    let position_variance = total / (2.0 * std::f64::consts::PI);
    Ok(OccupationEstimate {
        n_eff: position_variance / 2.0 - 0.5,
        position_variance,
        quadrature_error,
        tail_fraction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub mode: ModeName,
    pub omega: Vec<f64>,
    /// S_xx(ω) in 1/(rad/s), clipped at zero.
    pub values: Vec<f64>,
    pub occupation: OccupationEstimate,
    /// Occupation clamped to be non-negative.
    pub n_eff: f64,
    pub t_eff: f64,
    pub clipped: usize,
    pub fit: Option<LorentzFit>,
}

impl SpectrumResult {
    /// Fit the single line inside `window` and store it.
    pub fn fit_line(&mut self, window: (f64, f64)) -> Result<LorentzFit> {
        let fit = fit_lorentzian(&self.omega, &self.values, window)?;
        self.fit = Some(fit);
        Ok(fit)
    }

    pub fn peak(&self) -> (f64, f64) {
        self.omega
            .iter()
            .zip(&self.values)
            .map(|(&w, &v)| (w, v))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((f64::NAN, f64::NAN))
    }
}

/// Row selecting the quadrature `m + m†` of `mode`.
fn quadrature_row(model: &DriftModel, mode: ModeName) -> Result<DVector<Complex64>> {
    let n = model.dimension();
    let mut row = DVector::zeros(n);
    let idx = model
        .index_of(mode, false)
        .ok_or_else(|| Error::invalid("mode", format!("mode {mode} is not in the model basis")))?;
    row[idx] = Complex64::from(1.0);
    if let Some(d) = model.index_of(mode, true) {
        row[d] = Complex64::from(1.0);
    }
    Ok(row)
}

/// `u(ω) = M χ(ω) B` for a single selection row `M`, via one transposed solve.
fn response_row(
    model: &DriftModel,
    drift_t: &DMatrix<Complex64>,
    select: &DVector<Complex64>,
    omega: f64,
) -> Result<DVector<Complex64>> {
    let n = model.dimension();
    let mut m = -drift_t;
    for i in 0..n {
        m[(i, i)] -= I * omega;
    }
    let y = m
        .lu()
        .solve(select)
        .filter(|y| y.iter().all(|z| z.is_finite()))
        .ok_or_else(|| singular_error(model, omega))?;
    // u_k = Σ_i y_i B_ik
    Ok(model.noise_input.tr_mul(&y))
}

fn contract(u: &DVector<Complex64>, d: &DMatrix<f64>) -> f64 {
    let mut s = Complex64::default();
    for k in 0..u.len() {
        for l in 0..u.len() {
            let dkl = d[(k, l)];
            if dkl != 0.0 {
                s += u[k] * dkl * u[l].conj();
            }
        }
    }
    s.re
}

/// Raw (unclipped) position spectrum of `mode` at each frequency.
pub fn position_spectrum_values(
    model: &DriftModel,
    mode: ModeName,
    omega: &[f64],
) -> Result<Vec<f64>> {
    let select = quadrature_row(model, mode)?;
    let drift_t = model.drift.transpose();
    omega
        .iter()
        .map(|&w| {
            let u = response_row(model, &drift_t, &select, w)?;
            let mut s = contract(&u, &model.input_correlations);
            if let Some(mirror) = &model.mirror_correlations {
                let um = response_row(model, &drift_t, &select, -w)?;
                s += contract(&um, mirror);
            }
            Ok(s)
        })
        .collect()
}

/// S_xx(ω) for `x = m + m†`, its integrated occupation and effective temperature.
pub fn position_spectrum(
    model: &DriftModel,
    mode: ModeName,
    grid: &FrequencyGrid,
) -> Result<SpectrumResult> {
    model.ensure_stable()?;
    grid.check_covers(&model_anchors(model)?)?;
    let raw = position_spectrum_values(model, mode, grid.points())?;

    let max = raw.iter().copied().fold(0.0, f64::max);
    let floor = -NEGATIVE_TOLERANCE * max;
    let mut clipped = 0;
    let mut bad = 0;
    let values: Vec<f64> = raw
        .iter()
        .map(|&v| {
            if !v.is_finite() {
                bad += 1;
                0.0
            } else if v < 0.0 {
                clipped += 1;
                if v < floor {
                    bad += 1;
                }
                0.0
            } else {
                v
            }
        })
        .collect();
    if bad as f64 > MAX_NEGATIVE_FRACTION * values.len() as f64 {
        return Err(Error::NegativeSpectrum {
            count: bad,
            total: values.len(),
        });
    }

    let carrier = model.carrier(mode);
    let occupation = integrate_occupation(grid.points(), &values, carrier)?;
    let n_eff = occupation.n_eff.max(0.0);
    let t_eff = effective_temperature(n_eff, carrier.abs())?;
    Ok(SpectrumResult {
        mode,
        omega: grid.points().to_vec(),
        values,
        occupation,
        n_eff,
        t_eff,
        clipped,
        fit: None,
    })
}

/// Thermal force noise on mode `a` versus frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceSpectrum {
    pub omega: Vec<f64>,
    /// N²/Hz, with the same normalization as [`analytics::force_noise_psd`].
    pub s_ff: Vec<f64>,
}

/// Fluctuating force acting on mode `a`, from the exact frequency-domain
/// elimination of every other degree of freedom.
///
/// Eliminating the rest `R` of the basis gives `ȧ` driven by the noise
/// `η(ω) = Σ_j w_j(ω) ξ_j(ω)` with `w = B_a + A_aR (−iω − A_RR)⁻¹ B_R`.
/// The force `F = −i√(ħmω_a/2)(η − η†)` is evaluated narrowband: the
/// Hermitian-conjugate part reuses `w_j(ω)`, so every channel contributes
/// `|w_j(ω)|²(2n̄_j + 1)`.
pub fn force_spectrum_numeric(
    model: &DriftModel,
    spec: &SystemSpec,
    grid: &FrequencyGrid,
) -> Result<ForceSpectrum> {
    model.ensure_stable()?;
    let omega = grid.points().to_vec();
    let s_ff = omega
        .iter()
        .map(|&w| force_noise_at(model, spec, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(ForceSpectrum { omega, s_ff })
}

/// Single-frequency version of [`force_spectrum_numeric`] (no stability check).
pub fn force_noise_at(model: &DriftModel, spec: &SystemSpec, omega: f64) -> Result<f64> {
    if !(spec.mass_a > 0.0) {
        return Err(Error::invalid("mass_a", "mass must be > 0"));
    }
    let a = model
        .index_of(ModeName::A, false)
        .ok_or_else(|| Error::invalid("mode", "mode a is not in the model basis"))?;
    let n = model.dimension();
    let rest: Vec<usize> = (0..n)
        .filter(|&i| model.labels[i].mode != ModeName::A)
        .collect();
    let inputs = model.noise_input.ncols();

    let mut g = DMatrix::<Complex64>::zeros(rest.len(), rest.len());
    let mut b_r = DMatrix::<Complex64>::zeros(rest.len(), inputs);
    for (p, &i) in rest.iter().enumerate() {
        for (q, &j) in rest.iter().enumerate() {
            g[(p, q)] = -model.drift[(i, j)];
        }
        g[(p, p)] -= I * omega;
        for k in 0..inputs {
            b_r[(p, k)] = model.noise_input[(i, k)];
        }
    }
    let x = g
        .lu()
        .solve(&b_r)
        .filter(|x| x.iter().all(|z| z.is_finite()))
        .ok_or_else(|| singular_error(model, omega))?;

    let mut total = 0.0;
    for k in 0..inputs {
        let mut w = model.noise_input[(a, k)];
        for (p, &i) in rest.iter().enumerate() {
            w += model.drift[(a, i)] * x[(p, k)];
        }
        total += w.norm_sqr() * channel_weight(model, k);
    }
    Ok(analytics::force_prefactor(spec) * total)
}

/// Force noise at `omega` relative to the bare thermal force `ħmω_a γ_a(2n̄_a + 1)/2`
/// of an uncoupled mode `a`.
pub fn force_noise_factor_numeric(
    model: &DriftModel,
    spec: &SystemSpec,
    omega: f64,
) -> Result<f64> {
    let a_in = model
        .input_labels
        .iter()
        .position(|l| l.mode == ModeName::A && !l.dagger)
        .ok_or_else(|| Error::invalid("mode", "mode a has no input channel"))?;
    let bare = analytics::force_prefactor(spec) * spec.mode_a.gamma * channel_weight(model, a_in);
    if !(bare > 0.0) {
        return Err(Error::invalid(
            "mode_a.gamma",
            "gamma_a must be > 0 for a force reference",
        ));
    }
    Ok(force_noise_at(model, spec, omega)? / bare)
}

/// `2n̄ + 1` for input channel `k`.
fn channel_weight(model: &DriftModel, k: usize) -> f64 {
    let d = model.input_correlations[(k, k)];
    match &model.mirror_correlations {
        Some(m) => d + m[(k, k)],
        None => {
            let label = model.input_labels[k];
            let partner = model
                .input_labels
                .iter()
                .position(|l| l.mode == label.mode && l.dagger != label.dagger)
                .unwrap_or(k);
            d + model.input_correlations[(partner, partner)]
        }
    }
}

#[cfg(test)]
mod tests;
