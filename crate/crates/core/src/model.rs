//! Physical data model and linear Langevin system assembly.
//!
//! A [`SystemSpec`] describes two mechanical modes `a` and `b` coupled with
//! strength `lambda`, with `b` additionally coupled to a driven optical cavity
//! `c`. From it we assemble the drift matrix `A`, noise-input matrix `B` and
//! input correlations `D` of the linearized Heisenberg-Langevin equations
//! `dv/dt = A v + B xi`, either in the rotating-wave basis `(c, a, b)` or in
//! the full basis `(a, a†, b, b†, c, c†)` that keeps counter-rotating terms.
//!
//! Frequencies and rates are angular (rad/s). SI constants only enter through
//! occupations, temperatures and forces.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_8e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Below this ratio of ħω/k_BT the Bose-Einstein occupation switches to its
/// Laurent series.
const SERIES_THRESHOLD: f64 = 1e-8;

/// Bose-Einstein occupation `1/(exp(ħω/k_BT) - 1)`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!("omega must be > 0, got {omega}")));
    }
    if !(temperature >= 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be >= 0, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (K_B * temperature);
    if x < SERIES_THRESHOLD {
        Ok(1.0 / x - 0.5 + x / 12.0)
    } else {
        Ok(1.0 / x.exp_m1())
    }
}

/// Temperature whose Bose-Einstein occupation at `omega` equals `n_eff`.
pub fn effective_temperature(n_eff: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("omega must be > 0, got {omega}")));
    }
    if !(n_eff >= 0.0) {
        return Err(Error::Domain(format!("n_eff must be >= 0, got {n_eff}")));
    }
    if n_eff == 0.0 {
        return Ok(0.0);
    }
    Ok(HBAR * omega / (K_B * (1.0 / n_eff).ln_1p()))
}

/// Steady-state intracavity amplitude `E/(iΔ - κ/2)`.
pub fn intracavity_amplitude(pump: Complex64, detuning: f64, kappa: f64) -> Result<Complex64> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be > 0, got {kappa}")));
    }
    Ok(pump / Complex64::new(-kappa / 2.0, detuning))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalMode {
    pub omega: f64,
    pub gamma: f64,
    pub bath_temperature: f64,
}

impl MechanicalMode {
    pub fn new(omega: f64, gamma: f64, bath_temperature: f64) -> Result<Self> {
        let mode = Self {
            omega,
            gamma,
            bath_temperature,
        };
        mode.validate("mode")?;
        Ok(mode)
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::invalid(format!("{name}.omega"), "omega must be > 0"));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::invalid(format!("{name}.gamma"), "gamma must be ≥ 0"));
        }
        if !(self.bath_temperature >= 0.0) || !self.bath_temperature.is_finite() {
            return Err(Error::invalid(
                format!("{name}.bath_temperature"),
                "temperature must be ≥ 0",
            ));
        }
        Ok(())
    }

    /// `omega/gamma`; infinite for an undamped mode.
    pub fn quality_factor(&self) -> f64 {
        self.omega / self.gamma
    }
}

/// Pumped optical cavity in the frame rotating at the pump frequency.
///
/// `alpha` is stored rather than recomputed so a drive can be specified by
/// its intracavity amplitude (equivalently the optical damping it produces)
/// without choosing a pump strength. `pump` is kept consistent with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityDrive {
    pub kappa: f64,
    /// Δ = ω_pump − ω_cavity; negative for red detuning.
    pub detuning: f64,
    pub g0: f64,
    pub pump: Complex64,
    pub alpha: Complex64,
    pub bath_temperature: f64,
}

impl CavityDrive {
    pub fn from_pump(kappa: f64, detuning: f64, g0: f64, pump: Complex64) -> Result<Self> {
        let alpha = intracavity_amplitude(pump, detuning, kappa)?;
        let drive = Self {
            kappa,
            detuning,
            g0,
            pump,
            alpha,
            bath_temperature: 0.0,
        };
        drive.validate()?;
        Ok(drive)
    }

    pub fn from_alpha(kappa: f64, detuning: f64, g0: f64, alpha: Complex64) -> Result<Self> {
        let drive = Self {
            kappa,
            detuning,
            g0,
            pump: alpha * Complex64::new(-kappa / 2.0, detuning),
            alpha,
            bath_temperature: 0.0,
        };
        drive.validate()?;
        Ok(drive)
    }

    /// Real `alpha` chosen so that `4|α g0|²/κ` equals `gamma_opt`.
    pub fn with_optical_damping(&self, gamma_opt: f64) -> Result<Self> {
        if !(gamma_opt >= 0.0) {
            return Err(Error::Domain(format!(
                "optical damping must be >= 0, got {gamma_opt}"
            )));
        }
        if gamma_opt > 0.0 && !(self.g0 > 0.0) {
            return Err(Error::invalid(
                "cavity.g0",
                "g0 must be > 0 to produce optical damping",
            ));
        }
        let alpha = if gamma_opt == 0.0 {
            0.0
        } else {
            (gamma_opt * self.kappa).sqrt() / (2.0 * self.g0)
        };
        let mut drive = Self::from_alpha(self.kappa, self.detuning, self.g0, alpha.into())?;
        drive.bath_temperature = self.bath_temperature;
        Ok(drive)
    }

    pub fn with_bath_temperature(mut self, temperature: f64) -> Self {
        self.bath_temperature = temperature;
        self
    }

    /// Linearized coupling `α g0` (rad/s).
    pub fn coupling(&self) -> Complex64 {
        self.alpha * self.g0
    }

    /// Γ = 4|α g0|²/κ.
    pub fn optical_damping(&self) -> f64 {
        crate::analytics::optical_damping(self.coupling().norm(), self.kappa)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::invalid("cavity.kappa", "kappa must be > 0"));
        }
        if !self.detuning.is_finite() {
            return Err(Error::invalid("cavity.detuning", "detuning must be finite"));
        }
        if !(self.g0 >= 0.0) || !self.g0.is_finite() {
            return Err(Error::invalid("cavity.g0", "g0 must be ≥ 0"));
        }
        if !(self.bath_temperature >= 0.0) {
            return Err(Error::invalid(
                "cavity.bath_temperature",
                "temperature must be ≥ 0",
            ));
        }
        let expected = self.pump / Complex64::new(-self.kappa / 2.0, self.detuning);
        let scale = self
            .alpha
            .norm()
            .max(expected.norm())
            .max(f64::MIN_POSITIVE);
        if (expected - self.alpha).norm() > 1e-9 * scale {
            return Err(Error::invalid(
                "cavity.alpha",
                "alpha is inconsistent with pump/(iΔ − κ/2)",
            ));
        }
        Ok(())
    }
}

/// The assembled three-mode model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub mode_a: MechanicalMode,
    pub mode_b: MechanicalMode,
    pub cavity: CavityDrive,
    /// Mechanical-mechanical coupling, real and non-negative.
    pub lambda: f64,
    /// Effective mass of mode `a` in kg; only used for force noise.
    pub mass_a: f64,
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        self.mode_a.validate("mode_a")?;
        self.mode_b.validate("mode_b")?;
        self.cavity.validate()?;
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid("lambda", "lambda must be ≥ 0"));
        }
        if !(self.mass_a > 0.0) || !self.mass_a.is_finite() {
            return Err(Error::invalid("mass_a", "mass must be > 0"));
        }
        Ok(())
    }

    pub fn optical_damping(&self) -> f64 {
        self.cavity.optical_damping()
    }

    /// 𝒞_ab = 4λ²/(γ_a γ_b).
    pub fn c_ab(&self) -> f64 {
        4.0 * self.lambda * self.lambda / (self.mode_a.gamma * self.mode_b.gamma)
    }

    /// 𝒞_OM = Γ/γ_b.
    pub fn c_om(&self) -> f64 {
        self.optical_damping() / self.mode_b.gamma
    }

    /// Copy with the pump adjusted so that 𝒞_OM = `c_om` at fixed κ.
    pub fn with_cooperativity(&self, c_om: f64) -> Result<Self> {
        if !(self.mode_b.gamma > 0.0) {
            return Err(Error::invalid(
                "mode_b.gamma",
                "gamma_b must be > 0 to define an optomechanical cooperativity",
            ));
        }
        let mut spec = *self;
        spec.cavity = self.cavity.with_optical_damping(c_om * self.mode_b.gamma)?;
        Ok(spec)
    }

    /// Copy with ω_b moved and the cavity kept on b's red sideband.
    pub fn with_omega_b(&self, omega_b: f64) -> Result<Self> {
        let mut spec = *self;
        spec.mode_b.omega = omega_b;
        spec.cavity = CavityDrive::from_alpha(
            self.cavity.kappa,
            -omega_b,
            self.cavity.g0,
            self.cavity.alpha,
        )?
        .with_bath_temperature(self.cavity.bath_temperature);
        spec.validate()?;
        Ok(spec)
    }

    pub fn thermal_baths(&self) -> Result<ThermalBathSpec> {
        ThermalBathSpec::from_spec(self)
    }
}

/// Mean bath occupations at the carrier frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalBathSpec {
    pub nbar_a: f64,
    pub nbar_b: f64,
    pub nbar_c: f64,
}

impl ThermalBathSpec {
    /// Both mechanical baths are evaluated at ω_a when they share a
    /// temperature; otherwise each at its own mode frequency. The optical
    /// bath is evaluated at the cavity frequency offset `-Δ`, which gives 0
    /// for the default zero-temperature cavity.
    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        let a = &spec.mode_a;
        let b = &spec.mode_b;
        let nbar_a = thermal_occupation(a.omega, a.bath_temperature)?;
        let nbar_b = if a.bath_temperature == b.bath_temperature {
            nbar_a
        } else {
            thermal_occupation(b.omega, b.bath_temperature)?
        };
        let nbar_c = if spec.cavity.bath_temperature == 0.0 {
            0.0
        } else {
            thermal_occupation(spec.cavity.detuning.abs(), spec.cavity.bath_temperature)?
        };
        Ok(Self {
            nbar_a,
            nbar_b,
            nbar_c,
        })
    }

    pub fn uniform(nbar: f64) -> Self {
        Self {
            nbar_a: nbar,
            nbar_b: nbar,
            nbar_c: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fidelity {
    /// Rotating-wave three-mode model.
    Rwa,
    /// Six-component model with counter-rotating terms.
    Full,
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fidelity::Rwa => f.write_str("rwa"),
            Fidelity::Full => f.write_str("full"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    A,
    B,
    C,
}

impl fmt::Display for ModeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeName::A => "a",
            ModeName::B => "b",
            ModeName::C => "c",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperatorLabel {
    pub mode: ModeName,
    pub dagger: bool,
    /// Set for bath input operators (`a_in` etc).
    pub input: bool,
}

impl OperatorLabel {
    const fn op(mode: ModeName, dagger: bool) -> Self {
        Self {
            mode,
            dagger,
            input: false,
        }
    }

    const fn input(mode: ModeName, dagger: bool) -> Self {
        Self {
            mode,
            dagger,
            input: true,
        }
    }
}

impl fmt::Display for OperatorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.mode)?;
        if self.input {
            f.write_str("_in")?;
        }
        if self.dagger {
            f.write_str("†")?;
        }
        Ok(())
    }
}

/// Linear Langevin system `dv/dt = A v + B xi`.
///
/// `input_correlations` is the matrix `D` for which the spectrum of an
/// observable `x = M v` reads `S(ω) = M χ(ω) B D B† χ(ω)† M†`. In the full
/// basis it is `diag(n̄+1, n̄, ...)` over `(a_in, a_in†, ...)`. The
/// rotating-wave model has no creation-operator components, so the `n̄`
/// correlators enter through the mirrored frequency instead:
/// `mirror_correlations` holds them and contributes `u(-ω) D_m u(-ω)†`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftModel {
    pub fidelity: Fidelity,
    pub drift: DMatrix<Complex64>,
    pub noise_input: DMatrix<Complex64>,
    pub input_correlations: DMatrix<f64>,
    pub mirror_correlations: Option<DMatrix<f64>>,
    pub labels: Vec<OperatorLabel>,
    pub input_labels: Vec<OperatorLabel>,
    /// Reference frequencies of a, b and c (the latter is `-Δ`).
    pub carriers: [f64; 3],
}

impl DriftModel {
    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, mode: ModeName, dagger: bool) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l.mode == mode && l.dagger == dagger)
    }

    pub fn carrier(&self, mode: ModeName) -> f64 {
        match mode {
            ModeName::A => self.carriers[0],
            ModeName::B => self.carriers[1],
            ModeName::C => self.carriers[2],
        }
    }

    /// Index of the conjugate partner of basis element `i`, if present.
    pub fn partner(&self, i: usize) -> Option<usize> {
        let l = self.labels[i];
        self.index_of(l.mode, !l.dagger)
    }

    pub fn stability(&self) -> Result<Stability> {
        let eigenvalues = stability_eigenvalues(self)?;
        let tolerance = marginal_tolerance(&self.drift);
        let stable = eigenvalues.iter().all(|e| e.re < -tolerance);
        Ok(Stability {
            eigenvalues,
            stable,
        })
    }

    /// Errors with [`Error::Unstable`] naming the least damped eigenvalue.
    pub fn ensure_stable(&self) -> Result<Stability> {
        let stability = self.stability()?;
        if !stability.stable {
            return Err(Error::Unstable {
                eigenvalue: stability.least_damped(),
            });
        }
        Ok(stability)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stability {
    pub eigenvalues: Vec<Complex64>,
    pub stable: bool,
}

impl Stability {
    pub fn least_damped(&self) -> Complex64 {
        self.eigenvalues
            .iter()
            .copied()
            .max_by(|x, y| x.re.total_cmp(&y.re))
            .unwrap_or_default()
    }
}

/// Real parts within this distance of zero are treated as marginal.
fn marginal_tolerance(drift: &DMatrix<Complex64>) -> f64 {
    let norm = drift.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    64.0 * f64::EPSILON * norm
}

/// Rotating-wave system on the basis `(c, a, b)`.
pub fn build_rwa_system(spec: &SystemSpec) -> DriftModel {
    build_rwa_with_baths(spec, &default_baths(spec))
}

fn default_baths(spec: &SystemSpec) -> ThermalBathSpec {
    spec.thermal_baths()
        .unwrap_or_else(|_| ThermalBathSpec::uniform(0.0))
}

/// As [`build_rwa_system`] with explicit bath occupations.
pub fn build_rwa_with_baths(spec: &SystemSpec, baths: &ThermalBathSpec) -> DriftModel {
    let a = &spec.mode_a;
    let b = &spec.mode_b;
    let cav = &spec.cavity;
    let g = cav.coupling();
    let lambda = Complex64::from(spec.lambda);

    let mut drift = DMatrix::zeros(3, 3);
    // c
    drift[(0, 0)] = Complex64::new(-cav.kappa / 2.0, cav.detuning);
    drift[(0, 2)] = I * g;
    // a
    drift[(1, 1)] = Complex64::new(-a.gamma / 2.0, -a.omega);
    drift[(1, 2)] = -I * lambda;
    // b
    drift[(2, 0)] = I * g.conj();
    drift[(2, 1)] = -I * lambda;
    drift[(2, 2)] = Complex64::new(-b.gamma / 2.0, -b.omega);

    let rates = [cav.kappa, a.gamma, b.gamma];
    let noise_input = DMatrix::from_fn(3, 3, |i, j| {
        if i == j {
            Complex64::from(rates[i].sqrt())
        } else {
            Complex64::default()
        }
    });

    let nbar = [baths.nbar_c, baths.nbar_a, baths.nbar_b];
    let input_correlations = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        3,
        nbar.iter().map(|n| n + 1.0),
    ));
    let mirror_correlations = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&nbar));

    use ModeName::*;
    DriftModel {
        fidelity: Fidelity::Rwa,
        drift,
        noise_input,
        input_correlations,
        mirror_correlations: Some(mirror_correlations),
        labels: vec![
            OperatorLabel::op(C, false),
            OperatorLabel::op(A, false),
            OperatorLabel::op(B, false),
        ],
        input_labels: vec![
            OperatorLabel::input(C, false),
            OperatorLabel::input(A, false),
            OperatorLabel::input(B, false),
        ],
        carriers: [a.omega, b.omega, -cav.detuning],
    }
}

/// Full system on the basis `(a, a†, b, b†, c, c†)`, keeping the
/// counter-rotating terms `λ(ab + a†b†)` and `-g0(α* bc + α b†c†)`.
pub fn build_full_system(spec: &SystemSpec) -> DriftModel {
    build_full_with_baths(spec, &default_baths(spec))
}

/// As [`build_full_system`] with explicit bath occupations.
pub fn build_full_with_baths(spec: &SystemSpec, baths: &ThermalBathSpec) -> DriftModel {
    let a = &spec.mode_a;
    let b = &spec.mode_b;
    let cav = &spec.cavity;
    let g = cav.coupling();
    let lambda = Complex64::from(spec.lambda);
    const AA: usize = 0;
    const AD: usize = 1;
    const BB: usize = 2;
    const BD: usize = 3;
    const CC: usize = 4;
    const CD: usize = 5;

    let mut drift = DMatrix::zeros(6, 6);
    drift[(AA, AA)] = Complex64::new(-a.gamma / 2.0, -a.omega);
    drift[(AA, BB)] = -I * lambda;
    drift[(AA, BD)] = -I * lambda;

    drift[(BB, BB)] = Complex64::new(-b.gamma / 2.0, -b.omega);
    drift[(BB, AA)] = -I * lambda;
    drift[(BB, AD)] = -I * lambda;
    drift[(BB, CC)] = I * g.conj();
    drift[(BB, CD)] = I * g;

    drift[(CC, CC)] = Complex64::new(-cav.kappa / 2.0, cav.detuning);
    drift[(CC, BB)] = I * g;
    drift[(CC, BD)] = I * g;

    // Conjugate rows: conjugate every entry and swap each column with its partner.
    for (row, partner) in [(AA, AD), (BB, BD), (CC, CD)] {
        for col in 0..6 {
            let col_partner = col ^ 1;
            drift[(partner, col_partner)] = drift[(row, col)].conj();
        }
    }

    let rates = [a.gamma, a.gamma, b.gamma, b.gamma, cav.kappa, cav.kappa];
    let noise_input = DMatrix::from_fn(6, 6, |i, j| {
        if i == j {
            Complex64::from(rates[i].sqrt())
        } else {
            Complex64::default()
        }
    });

    let weights = [
        baths.nbar_a + 1.0,
        baths.nbar_a,
        baths.nbar_b + 1.0,
        baths.nbar_b,
        baths.nbar_c + 1.0,
        baths.nbar_c,
    ];
    let input_correlations = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&weights));

    use ModeName::*;
    let labels: Vec<_> = [A, B, C]
        .into_iter()
        .flat_map(|m| [OperatorLabel::op(m, false), OperatorLabel::op(m, true)])
        .collect();
    let input_labels = [A, B, C]
        .into_iter()
        .flat_map(|m| {
            [
                OperatorLabel::input(m, false),
                OperatorLabel::input(m, true),
            ]
        })
        .collect();

    DriftModel {
        fidelity: Fidelity::Full,
        drift,
        noise_input,
        input_correlations,
        mirror_correlations: None,
        labels,
        input_labels,
        carriers: [a.omega, b.omega, -cav.detuning],
    }
}

pub fn build_system(spec: &SystemSpec, fidelity: Fidelity) -> DriftModel {
    build_system_with_baths(spec, fidelity, &default_baths(spec))
}

pub fn build_system_with_baths(
    spec: &SystemSpec,
    fidelity: Fidelity,
    baths: &ThermalBathSpec,
) -> DriftModel {
    match fidelity {
        Fidelity::Rwa => build_rwa_with_baths(spec, baths),
        Fidelity::Full => build_full_with_baths(spec, baths),
    }
}

/// All eigenvalues of the drift matrix.
pub fn stability_eigenvalues(model: &DriftModel) -> Result<Vec<Complex64>> {
    let n = model.dimension();
    // Already triangular (decoupled systems): read the diagonal exactly.
    let triangular = (0..n).all(|i| (0..i).all(|j| model.drift[(i, j)] == Complex64::default()))
        || (0..n).all(|i| (i + 1..n).all(|j| model.drift[(i, j)] == Complex64::default()));
    if triangular {
        return Ok(model.drift.diagonal().iter().copied().collect());
    }
    let schur = nalgebra::linalg::Schur::try_new(model.drift.clone(), f64::EPSILON, 10_000)
        .ok_or(Error::EigenSolver)?;
    let eig = schur.eigenvalues().ok_or(Error::EigenSolver)?;
    Ok(eig.iter().copied().collect())
}
