//! Closed-form rotating-wave results.
//!
//! With the cavity adiabatically eliminated, mode `b` acquires the optical
//! damping Γ = 4|αg₀|²/κ, and mode `a` inherits an induced damping
//! Γ_a = 4λ²/(γ_b + Γ) through its coupling to `b`. Everything here is a pure
//! function of the [`SystemSpec`] and Γ.
//!
//! The closed forms assume near-degenerate modes, a sideband-resolved cavity
//! and a damping hierarchy; results carry [`RegimeFlags`] rather than failing
//! when those assumptions are stretched.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SystemSpec, ThermalBathSpec, HBAR, K_B};

/// Factor by which a "much less than" condition must hold for its flag to be set.
pub const REGIME_FACTOR: f64 = 10.0;

/// Validity of the approximations behind the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    /// |ω_b − ω_a| ≪ γ_b + Γ
    pub near_degenerate: bool,
    /// κ ≫ γ_b + Γ and |Δ + ω_b| ≪ κ/2, so the cavity acts as a damping channel.
    pub sideband_resolved: bool,
    /// (γ_b + Γ)/γ_a ≫ 𝒞_ab ≫ 1
    pub damping_hierarchy: bool,
    /// λ and |αg₀| ≪ ω_a, so counter-rotating terms are negligible.
    pub rotating_wave: bool,
}

impl RegimeFlags {
    pub fn evaluate(spec: &SystemSpec, gamma_opt: f64) -> Self {
        let f = REGIME_FACTOR;
        let gb_total = spec.mode_b.gamma + gamma_opt;
        let detuning = (spec.mode_b.omega - spec.mode_a.omega).abs();
        let c_ab = spec.c_ab();
        let kappa = spec.cavity.kappa;
        Self {
            near_degenerate: f * detuning < gb_total,
            sideband_resolved: kappa > f * gb_total
                && f * (spec.cavity.detuning + spec.mode_b.omega).abs() < kappa / 2.0,
            damping_hierarchy: gb_total / spec.mode_a.gamma > f * c_ab && c_ab > f,
            rotating_wave: f * spec.lambda < spec.mode_a.omega
                && f * spec.cavity.coupling().norm() < spec.mode_a.omega,
        }
    }

    pub fn all(&self) -> bool {
        self.near_degenerate
            && self.sideband_resolved
            && self.damping_hierarchy
            && self.rotating_wave
    }
}

/// Γ = 4|αg₀|²/κ.
pub fn optical_damping(alpha_g0: f64, kappa: f64) -> f64 {
    4.0 * alpha_g0 * alpha_g0 / kappa
}

/// Susceptibility of the optically damped mode `b` at λ = 0.
pub fn chi_b(omega: f64, spec: &SystemSpec, gamma_opt: f64) -> Complex64 {
    let b = &spec.mode_b;
    Complex64::new((b.gamma + gamma_opt) / 2.0, -(omega - b.omega)).inv()
}

/// Susceptibility of mode `a` dressed by its coupling to `b`.
pub fn chi_a(omega: f64, spec: &SystemSpec, gamma_opt: f64) -> Complex64 {
    let a = &spec.mode_a;
    let lambda2 = spec.lambda * spec.lambda;
    (Complex64::new(a.gamma / 2.0, -(omega - a.omega)) + chi_b(omega, spec, gamma_opt) * lambda2)
        .inv()
}

/// Frequency pull and total damping of mode `a` evaluated at `omega`:
/// `(ω_a′, γ_a′)`.
pub fn mode_a_response(omega: f64, spec: &SystemSpec, gamma_opt: f64) -> (f64, f64) {
    let lambda2 = spec.lambda * spec.lambda;
    let gb_total = spec.mode_b.gamma + gamma_opt;
    let delta = omega - spec.mode_b.omega;
    let denom = delta * delta + gb_total * gb_total / 4.0;
    (
        spec.mode_a.omega + lambda2 * delta / denom,
        spec.mode_a.gamma + lambda2 * gb_total / denom,
    )
}

/// Γ_a = 4λ²/(γ_b + Γ).
pub fn induced_damping(lambda: f64, gamma_b: f64, gamma_opt: f64) -> Result<f64> {
    let total = gamma_b + gamma_opt;
    if !(total > 0.0) {
        return Err(Error::Domain(
            "induced damping needs a positive total damping of mode b".into(),
        ));
    }
    Ok(4.0 * lambda * lambda / total)
}

/// Effective occupation of mode `a` with its regime flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormOccupation {
    pub n_eff: f64,
    /// Induced damping at ω = ω_a (reduces to Γ_a for degenerate modes).
    pub gamma_a_induced: f64,
    pub linewidth_a: f64,
    pub flags: RegimeFlags,
}

/// Weighted bath average
/// `n_eff = [γ_a n̄_a + Γ_a (γ_b n̄_b + Γ n̄_c)/(γ_b + Γ)] / (γ_a + Γ_a)`.
///
/// Γ_a is taken from the damping of mode `a` at ω = ω_a, which equals
/// 4λ²/(γ_b + Γ) for degenerate modes and falls off as |ω_b − ω_a| grows.
/// With n̄_c = 0 this is the standard rotating-wave result; the extra vacuum
/// 1/2 of the symmetric position variance is not included.
pub fn n_eff_closed_form(
    spec: &SystemSpec,
    gamma_opt: f64,
    baths: &ThermalBathSpec,
) -> Result<ClosedFormOccupation> {
    let gamma_a = spec.mode_a.gamma;
    let gamma_b = spec.mode_b.gamma;
    let gb_total = gamma_b + gamma_opt;
    if !(gb_total > 0.0) {
        return Err(Error::Domain(
            "closed-form occupation needs γ_b + Γ > 0".into(),
        ));
    }
    let (_, gamma_prime) = mode_a_response(spec.mode_a.omega, spec, gamma_opt);
    let induced = gamma_prime - gamma_a;
    let linewidth = gamma_a + induced;
    if !(linewidth > 0.0) {
        return Err(Error::Domain(
            "closed-form occupation needs γ_a + Γ_a > 0".into(),
        ));
    }
    let nbar_b_channel = (gamma_b * baths.nbar_b + gamma_opt * baths.nbar_c) / gb_total;
    let n_eff = (gamma_a * baths.nbar_a + induced * nbar_b_channel) / linewidth;
    Ok(ClosedFormOccupation {
        n_eff,
        gamma_a_induced: induced,
        linewidth_a: linewidth,
        flags: RegimeFlags::evaluate(spec, gamma_opt),
    })
}

/// 𝒞*_OM = √(1 + 𝒞_ab).
pub fn optimal_cooperativity(c_ab: f64) -> Result<f64> {
    if !(c_ab >= 0.0) {
        return Err(Error::Domain(format!("C_ab must be >= 0, got {c_ab}")));
    }
    Ok((1.0 + c_ab).sqrt())
}

/// n*_eff/n̄ = 2/(1 + √(1 + 𝒞_ab)).
pub fn cooling_limit_ratio(c_ab: f64) -> Result<f64> {
    Ok(2.0 / (1.0 + optimal_cooperativity(c_ab)?))
}

/// Linewidth of mode `a` at the optimum, γ_a√(1 + 𝒞_ab).
pub fn narrowed_linewidth(gamma_a: f64, c_ab: f64) -> Result<f64> {
    Ok(gamma_a * optimal_cooperativity(c_ab)?)
}

/// Bracket `1 + 𝒞_ab/(1 + 𝒞_OM)²` of the thermal force noise.
pub fn force_noise_factor(c_ab: f64, c_om: f64) -> f64 {
    1.0 + c_ab / ((1.0 + c_om) * (1.0 + c_om))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceNoise {
    /// Thermal force PSD, N²/Hz.
    pub s_ff: f64,
    pub factor: f64,
    /// The same bracket with 𝒞_OM = 0 (direct optomechanical cooling).
    pub conventional_factor: f64,
    /// n̄ ≫ 1, where k_BT replaces ħω(n̄ + 1/2).
    pub classical: bool,
}

impl ForceNoise {
    pub fn reduction(&self) -> f64 {
        self.conventional_factor / self.factor
    }
}

/// Classical thermal force noise on mode `a`: `[1 + 𝒞_ab/(1 + 𝒞_OM)²] m γ_a k_B T`.
pub fn force_noise_psd(spec: &SystemSpec, gamma_opt: f64, temperature: f64) -> Result<ForceNoise> {
    if !(spec.mass_a > 0.0) {
        return Err(Error::invalid("mass_a", "mass must be > 0"));
    }
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    let c_ab = spec.c_ab();
    let c_om = gamma_opt / spec.mode_b.gamma;
    let factor = force_noise_factor(c_ab, c_om);
    let nbar = crate::model::thermal_occupation(spec.mode_a.omega, temperature)?;
    Ok(ForceNoise {
        s_ff: factor * spec.mass_a * spec.mode_a.gamma * K_B * temperature,
        factor,
        conventional_factor: force_noise_factor(c_ab, 0.0),
        classical: nbar > REGIME_FACTOR,
    })
}

/// Prefactor `ħ m ω_a / 2` converting dimensionless noise rates into force PSD.
pub fn force_prefactor(spec: &SystemSpec) -> f64 {
    HBAR * spec.mass_a * spec.mode_a.omega / 2.0
}

/// Every closed-form figure of merit for a spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingSummary {
    pub gamma_opt: f64,
    pub gamma_a_induced: f64,
    pub c_ab: f64,
    pub c_om: f64,
    pub n_eff: f64,
    pub linewidth_a: f64,
    pub omega_a_pulled: f64,
    pub flags: RegimeFlags,
}

pub fn cooling_summary(spec: &SystemSpec) -> Result<CoolingSummary> {
    let gamma_opt = spec.optical_damping();
    let baths = spec.thermal_baths()?;
    let occ = n_eff_closed_form(spec, gamma_opt, &baths)?;
    let (omega_a_pulled, _) = mode_a_response(spec.mode_a.omega, spec, gamma_opt);
    Ok(CoolingSummary {
        gamma_opt,
        gamma_a_induced: occ.gamma_a_induced,
        c_ab: spec.c_ab(),
        c_om: gamma_opt / spec.mode_b.gamma,
        n_eff: occ.n_eff,
        linewidth_a: occ.linewidth_a,
        omega_a_pulled,
        flags: occ.flags,
    })
}
