//! Beam-resonator design: two quarter-wave arms joined by a common support.
//!
//! The symmetric combination of the arms is mode `a`, limited by
//! thermoelastic damping; the antisymmetric one is mode `b`, limited by
//! clamping loss into the support. A length mismatch couples them with
//! `λ = εω₀`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytics::RegimeFlags;
use crate::error::{Error, Result};
use crate::model::{CavityDrive, MechanicalMode, SystemSpec};

/// Euler-Bernoulli eigenvalue of the first clamped-free flexural mode.
const CANTILEVER_BETA: f64 = 1.875;
/// Critical thermal width at the reference frequency.
const H0_REFERENCE: f64 = 6.546e-3;
const H0_REFERENCE_OMEGA: f64 = 2.0 * PI * 1.0e6;
/// The small-width thermoelastic asymptote is trusted up to this fraction of h₀.
const TED_MAX_WIDTH_RATIO: f64 = 0.1;
/// Below this length-to-width ratio the beam formula is flagged.
const MIN_SLENDERNESS: f64 = 10.0;

/// Reference clamping datapoint: ω₀/2π = 1.102 MHz, γ_b/2π = 140 Hz at
/// L = 20 µm, h = 0.3 µm.
pub const CLAMPING_REFERENCE: (f64, f64, f64) = (1.102e6 / 140.0, 20e-6, 0.3e-6);

/// Prefactor of `Q = c (L/h)²` reproducing [`CLAMPING_REFERENCE`].
pub fn default_clamping_calibration() -> f64 {
    let (q, l, h) = CLAMPING_REFERENCE;
    q / (l / h).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamGeometry {
    pub l_left: f64,
    pub l_right: f64,
    /// Width along the vibration direction.
    pub h: f64,
    /// Width of the central support.
    pub w: f64,
    /// Out-of-plane thickness; only enters the modal mass.
    pub thickness: f64,
}

impl BeamGeometry {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("geometry.l_left", self.l_left),
            ("geometry.l_right", self.l_right),
            ("geometry.h", self.h),
            ("geometry.w", self.w),
            ("geometry.thickness", self.thickness),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(field, "length must be > 0"));
            }
        }
        Ok(())
    }

    pub fn mean_length(&self) -> f64 {
        0.5 * (self.l_left + self.l_right)
    }

    /// ε = |L_L − L_R|/(L_L + L_R).
    pub fn asymmetry(&self) -> f64 {
        (self.l_left - self.l_right).abs() / (self.l_left + self.l_right)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub name: String,
    /// Pa.
    pub youngs_modulus: f64,
    /// kg/m³.
    pub density: f64,
    /// Linear thermal expansion coefficient, 1/K.
    pub tec: f64,
    /// Volumetric heat capacity, J/(m³·K).
    pub heat_capacity_vol: f64,
}

impl Material {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("youngs_modulus", self.youngs_modulus),
            ("density", self.density),
            ("tec", self.tec),
            ("heat_capacity_vol", self.heat_capacity_vol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(
                    format!("material.{field}"),
                    format!("{field} of {} must be > 0", self.name),
                ));
            }
        }
        Ok(())
    }

    /// The shipped silicon nitride entry.
    pub fn silicon_nitride() -> Self {
        MaterialDb::builtin()
            .get("SiN")
            .cloned()
            .expect("builtin database contains SiN")
    }
}

/// Named materials read from a TOML file with `[[material]]` tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialDb {
    pub material: Vec<Material>,
}

const BUILTIN_MATERIALS: &str = include_str!("../data/materials.toml");

impl MaterialDb {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_MATERIALS).expect("builtin material database parses")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let db: MaterialDb = toml::from_str(text)
            .map_err(|e| Error::invalid("materials", e.message().to_string()))?;
        for m in &db.material {
            m.validate()?;
        }
        Ok(db)
    }

    pub fn get(&self, name: &str) -> Option<&Material> {
        self.material.iter().find(|m| m.name == name)
    }

    pub fn lookup(&self, name: &str) -> Result<&Material> {
        self.get(name).ok_or_else(|| {
            let known: Vec<_> = self.material.iter().map(|m| m.name.as_str()).collect();
            Error::invalid(
                "material",
                format!("unknown material {name:?}; known: {}", known.join(", ")),
            )
        })
    }
}

/// Normal-mode description of two arms at ω_L and ω_R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalModes {
    pub omega0: f64,
    /// |ω_L − ω_R|/(ω_L + ω_R).
    pub epsilon: f64,
    /// εω₀.
    pub lambda: f64,
    left_higher: bool,
}

impl NormalModes {
    /// (ω_L, ω_R) = (ω₀(1 ± ε), ω₀(1 ∓ ε)).
    pub fn arm_frequencies(&self) -> (f64, f64) {
        let hi = self.omega0 * (1.0 + self.epsilon);
        let lo = self.omega0 * (1.0 - self.epsilon);
        if self.left_higher {
            (hi, lo)
        } else {
            (lo, hi)
        }
    }
}

pub fn normal_mode_map(omega_left: f64, omega_right: f64) -> Result<NormalModes> {
    if !(omega_left > 0.0) || !(omega_right > 0.0) {
        return Err(Error::Domain(format!(
            "arm frequencies must be > 0, got {omega_left} and {omega_right}"
        )));
    }
    let omega0 = 0.5 * (omega_left + omega_right);
    let epsilon = (omega_left - omega_right).abs() / (omega_left + omega_right);
    Ok(NormalModes {
        omega0,
        epsilon,
        lambda: epsilon * omega0,
        left_higher: omega_left >= omega_right,
    })
}

/// Clamped-free flexural estimate `ω = 1.875² (h/L²) √(E/12ρ)`.
pub fn cantilever_frequency(length: f64, h: f64, material: &Material) -> f64 {
    CANTILEVER_BETA.powi(2) * h / (length * length)
        * (material.youngs_modulus / (12.0 * material.density)).sqrt()
}

/// Whether the beam is long enough for the flexural estimate.
pub fn is_slender(length: f64, h: f64) -> bool {
    length / h >= MIN_SLENDERNESS
}

/// Clamping-limited `Q = calibration · (L/h)²`.
pub fn clamping_q(length: f64, h: f64, calibration: f64) -> Result<f64> {
    if !(length > 0.0) || !(h > 0.0) || !(calibration > 0.0) {
        return Err(Error::Domain(
            "clamping Q needs positive length, width and calibration".into(),
        ));
    }
    Ok(calibration * (length / h).powi(2))
}

/// Golden-rule decay into a support continuum, `J²ρ`.
pub fn clamping_gamma_quasimode(j: f64, rho_dos: f64) -> Result<f64> {
    if !(j >= 0.0) || !(rho_dos >= 0.0) {
        return Err(Error::Domain(
            "coupling and density of states must be >= 0".into(),
        ));
    }
    Ok(j * j * rho_dos)
}

/// h₀(ω) = 6.546 mm · √(2π·1 MHz / ω).
pub fn ted_critical_width(omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("omega must be > 0, got {omega}")));
    }
    Ok(H0_REFERENCE * (H0_REFERENCE_OMEGA / omega).sqrt())
}

/// `Q⁻¹ = (Eα²T/C_p)·5(h/h₀)²`, valid for h ≤ 0.1 h₀.
pub fn ted_quality_factor(
    material: &Material,
    temperature: f64,
    h: f64,
    omega: f64,
) -> Result<f64> {
    material.validate()?;
    if !(temperature >= 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be >= 0, got {temperature}"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::Domain(format!("h must be > 0, got {h}")));
    }
    let h0 = ted_critical_width(omega)?;
    if h > TED_MAX_WIDTH_RATIO * h0 {
        return Err(Error::Regime(format!(
            "h = {h:e} m exceeds {TED_MAX_WIDTH_RATIO} h0 with h0 = {h0:e} m; \
             the small-width thermoelastic asymptote does not apply"
        )));
    }
    if temperature == 0.0 {
        return Ok(f64::INFINITY);
    }
    let strength =
        material.youngs_modulus * material.tec.powi(2) * temperature / material.heat_capacity_vol;
    Ok(1.0 / (strength * 5.0 * (h / h0).powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBudget {
    pub omega0: f64,
    pub gamma_clamp: f64,
    pub gamma_ted: f64,
    pub q_clamp: f64,
    pub q_ted: f64,
    pub lambda: f64,
}

pub const WARN_NO_EXPORT: &str = "no export channel";
pub const WARN_MODE_A_DAMPED: &str = "mode-a not weakly damped";
pub const WARN_SHORT_BEAM: &str = "beam too short for the flexural estimate";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub spec: SystemSpec,
    pub budget: LossBudget,
    pub epsilon: f64,
    pub c_ab: f64,
    pub flags: RegimeFlags,
    pub warnings: Vec<String>,
}

/// Compose the design formulas into a [`SystemSpec`].
///
/// Each arm's cantilever frequency sets ω₀ and ε through
/// [`normal_mode_map`]; both modes sit at ω₀. Mode `a` loses energy only
/// thermoelastically, mode `b` only through the clamp, evaluated at the mean
/// arm length. The modal mass of the symmetric mode is a quarter of the mass
/// of both arms.
pub fn design_to_system(
    geometry: &BeamGeometry,
    material: &Material,
    temperature: f64,
    cavity: &CavityDrive,
    clamping_calibration: f64,
) -> Result<DesignReport> {
    geometry.validate()?;
    material.validate()?;
    let length = geometry.mean_length();
    let modes = normal_mode_map(
        cantilever_frequency(geometry.l_left, geometry.h, material),
        cantilever_frequency(geometry.l_right, geometry.h, material),
    )?;
    let (omega0, epsilon, lambda) = (modes.omega0, modes.epsilon, modes.lambda);

    let q_clamp = clamping_q(length, geometry.h, clamping_calibration)?;
    let q_ted = ted_quality_factor(material, temperature, geometry.h, omega0)?;
    let gamma_clamp = omega0 / q_clamp;
    let gamma_ted = omega0 / q_ted;

    let mass_a =
        material.density * geometry.h * geometry.thickness * (geometry.l_left + geometry.l_right)
            / 4.0;
    let spec = SystemSpec {
        mode_a: MechanicalMode::new(omega0, gamma_ted, temperature)?,
        mode_b: MechanicalMode::new(omega0, gamma_clamp, temperature)?,
        cavity: *cavity,
        lambda,
        mass_a,
    };
    spec.validate()?;

    let mut warnings = Vec::new();
    if lambda == 0.0 {
        warnings.push(WARN_NO_EXPORT.to_string());
    }
    if gamma_ted > gamma_clamp {
        warnings.push(WARN_MODE_A_DAMPED.to_string());
    }
    if !is_slender(geometry.l_left.min(geometry.l_right), geometry.h) {
        warnings.push(WARN_SHORT_BEAM.to_string());
    }
    let c_ab = if gamma_ted > 0.0 {
        spec.c_ab()
    } else {
        f64::INFINITY
    };
    Ok(DesignReport {
        flags: RegimeFlags::evaluate(&spec, spec.optical_damping()),
        spec,
        budget: LossBudget {
            omega0,
            gamma_clamp,
            gamma_ted,
            q_clamp,
            q_ted,
            lambda,
        },
        epsilon,
        c_ab,
        warnings,
    })
}
