//! Ready-made parameter sets.
//!
//! The dimensionless sets put ω_a = ω_b = 1 with the cavity on b's red
//! sideband and zero bath temperatures; occupations are then supplied
//! explicitly through [`ThermalBathSpec`](crate::model::ThermalBathSpec).

use std::f64::consts::PI;

use crate::error::Result;
use crate::model::{CavityDrive, MechanicalMode, SystemSpec};

/// Optical coupling per photon used by the dimensionless sets.
const G0: f64 = 1e-3;

/// Degenerate modes at ω = 1 with no optical drive yet.
pub fn dimensionless(gamma_a: f64, gamma_b: f64, lambda: f64, kappa: f64) -> Result<SystemSpec> {
    let spec = SystemSpec {
        mode_a: MechanicalMode::new(1.0, gamma_a, 0.0)?,
        mode_b: MechanicalMode::new(1.0, gamma_b, 0.0)?,
        cavity: CavityDrive::from_alpha(kappa, -1.0, G0, 0.0.into())?,
        lambda,
        mass_a: 1.0,
    };
    spec.validate()?;
    Ok(spec)
}

/// `λ = 10⁻⁴`, `γ_b = 10⁻³`, `κ = 0.05`, with γ_a set by `c_ab`.
///
/// Small enough couplings for the rotating-wave optimum to hold in the full
/// model, large enough κ to keep the cavity adiabatic up to 𝒞_OM ≈ 20.
pub fn weak_coupling(c_ab: f64) -> Result<SystemSpec> {
    let (lambda, gamma_b) = (1e-4, 1e-3);
    dimensionless(
        4.0 * lambda * lambda / (c_ab * gamma_b),
        gamma_b,
        lambda,
        0.05,
    )
}

/// 𝒞_ab = 50 with every coupling below 10⁻³ of ω_a up to 𝒞_OM = 30:
/// `λ = 3·10⁻⁵`, `γ_b = 10⁻⁴`, `κ = 10⁻³`.
pub fn cross_fidelity() -> Result<SystemSpec> {
    let (lambda, gamma_b) = (3e-5, 1e-4);
    dimensionless(
        4.0 * lambda * lambda / (50.0 * gamma_b),
        gamma_b,
        lambda,
        1e-3,
    )
}

/// SI-unit set near the resonator of the example implementation:
/// ω = 2π·1.102 MHz, γ_a = 2π·1 Hz, γ_b = 2π·1 kHz, λ = 2π·111.8 Hz
/// (𝒞_ab ≈ 50), κ = 2π·100 kHz, both baths at `temperature`.
pub fn resonator_si(temperature: f64) -> Result<SystemSpec> {
    let omega = 2.0 * PI * 1.102e6;
    let spec = SystemSpec {
        mode_a: MechanicalMode::new(omega, 2.0 * PI * 1.0, temperature)?,
        mode_b: MechanicalMode::new(omega, 2.0 * PI * 1.0e3, temperature)?,
        cavity: CavityDrive::from_alpha(2.0 * PI * 1.0e5, -omega, 2.0 * PI * 100.0, 0.0.into())?,
        lambda: 2.0 * PI * 111.8,
        mass_a: 1.0e-15,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cooperativities() {
        for c in [8.0, 50.0, 200.0] {
            assert!((weak_coupling(c).unwrap().c_ab() / c - 1.0).abs() < 1e-12);
        }
        assert!((cross_fidelity().unwrap().c_ab() / 50.0 - 1.0).abs() < 1e-12);
        assert!((resonator_si(300.0).unwrap().c_ab() - 50.0).abs() < 0.01);
    }
}
