//! Cooperativity and detuning sweeps, and the search for the optimal
//! optomechanical cooperativity.
//!
//! Cooperativity is varied through the intracavity amplitude at fixed κ,
//! like turning the pump power. At [`Fidelity::Rwa`] every point is the
//! closed-form occupation; at [`Fidelity::Full`] it is the integrated
//! spectrum of the six-component model.

use serde::Serialize;

use crate::analytics::{n_eff_closed_form, RegimeFlags};
use crate::error::{Error, Result};
use crate::model::{
    build_system_with_baths, effective_temperature, Fidelity, ModeName, SystemSpec, ThermalBathSpec,
};
use crate::spectral::{position_spectrum, FrequencyGrid, GridConfig};

/// How each sweep point is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSettings {
    pub fidelity: Fidelity,
    pub baths: ThermalBathSpec,
    pub grid: GridConfig,
}

impl SweepSettings {
    /// Bath occupations taken from the temperatures in `spec`.
    pub fn new(spec: &SystemSpec, fidelity: Fidelity) -> Result<Self> {
        Ok(Self {
            fidelity,
            baths: spec.thermal_baths()?,
            grid: GridConfig::default(),
        })
    }

    pub fn with_baths(mut self, baths: ThermalBathSpec) -> Self {
        self.baths = baths;
        self
    }

    pub fn with_grid(mut self, grid: GridConfig) -> Self {
        self.grid = grid;
        self
    }
}

/// One evaluated configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointResult {
    pub n_eff: f64,
    /// T_eff/T with both temperatures read off at ω_a.
    pub t_ratio: f64,
    /// Linewidth of the mode-a line, rad/s.
    pub linewidth: f64,
    pub flags: RegimeFlags,
}

/// Occupation of mode `a` for `spec` as configured.
pub fn evaluate(spec: &SystemSpec, settings: &SweepSettings) -> Result<PointResult> {
    spec.validate()?;
    let gamma_opt = spec.optical_damping();
    let flags = RegimeFlags::evaluate(spec, gamma_opt);
    let (n_eff, linewidth) = match settings.fidelity {
        Fidelity::Rwa => {
            let cf = n_eff_closed_form(spec, gamma_opt, &settings.baths)?;
            (cf.n_eff, cf.linewidth_a)
        }
        Fidelity::Full => {
            let model = build_system_with_baths(spec, Fidelity::Full, &settings.baths);
            let stability = model.ensure_stable()?;
            let grid = FrequencyGrid::for_model(&model, &settings.grid)?;
            let s = position_spectrum(&model, ModeName::A, &grid)?;
            let linewidth = stability
                .eigenvalues
                .iter()
                .filter(|e| -e.im > 0.0)
                .map(|e| -2.0 * e.re)
                .fold(f64::INFINITY, f64::min);
            (s.n_eff, linewidth)
        }
    };
    Ok(PointResult {
        n_eff,
        t_ratio: temperature_ratio(n_eff, settings.baths.nbar_a, spec.mode_a.omega)?,
        linewidth,
        flags,
    })
}

fn temperature_ratio(n_eff: f64, nbar: f64, omega: f64) -> Result<f64> {
    let t_ref = effective_temperature(nbar, omega)?;
    if t_ref == 0.0 {
        return Ok(f64::NAN);
    }
    Ok(effective_temperature(n_eff.max(0.0), omega)? / t_ref)
}

/// Per-point results along one parameter axis. Failed points hold NaN and
/// an error message; the sweep itself does not stop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: String,
    pub values: Vec<f64>,
    pub n_eff: Vec<f64>,
    pub t_ratio: Vec<f64>,
    pub linewidths: Vec<f64>,
    pub validity_flags: Vec<Option<RegimeFlags>>,
    pub errors: Vec<Option<String>>,
}

impl SweepResult {
    fn new(axis: &str) -> Self {
        Self {
            axis: axis.to_string(),
            values: Vec::new(),
            n_eff: Vec::new(),
            t_ratio: Vec::new(),
            linewidths: Vec::new(),
            validity_flags: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn push(&mut self, value: f64, point: Result<PointResult>) {
        self.values.push(value);
        match point {
            Ok(p) => {
                self.n_eff.push(p.n_eff);
                self.t_ratio.push(p.t_ratio);
                self.linewidths.push(p.linewidth);
                self.validity_flags.push(Some(p.flags));
                self.errors.push(None);
            }
            Err(e) => {
                self.n_eff.push(f64::NAN);
                self.t_ratio.push(f64::NAN);
                self.linewidths.push(f64::NAN);
                self.validity_flags.push(None);
                self.errors.push(Some(format!("{}: {e}", e.kind())));
            }
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the smallest finite occupation.
    pub fn argmin(&self) -> Option<usize> {
        self.n_eff
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_finite())
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }
}

/// 60 log-spaced points per decade over [10⁻², 10³].
pub fn default_cooperativity_grid() -> Vec<f64> {
    log_space(1e-2, 1e3, 301)
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Occupation of mode `a` at each optomechanical cooperativity in `c_om`.
pub fn sweep_cooperativity(
    spec: &SystemSpec,
    c_om: &[f64],
    settings: &SweepSettings,
) -> SweepResult {
    let mut out = SweepResult::new("c_om");
    for &c in c_om {
        let point = check_non_negative("c_om", c)
            .and_then(|_| spec.with_cooperativity(c))
            .and_then(|s| evaluate(&s, settings));
        out.push(c, point);
    }
    out
}

fn check_non_negative(field: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::invalid(field, format!("must be ≥ 0, got {v}")));
    }
    Ok(())
}

/// Location and value of the occupation minimum over 𝒞_OM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub c_om_star: f64,
    pub n_eff_star: f64,
    /// n_eff*/n̄_a.
    pub n_ratio: f64,
    pub t_ratio: f64,
    pub linewidth: f64,
    pub evaluations: usize,
}

const SCAN_POINTS: usize = 24;
const LOG_TOLERANCE: f64 = 1e-4;

/// Minimize n_eff over 𝒞_OM in `bracket`.
///
/// A coarse log-spaced scan locates the discrete minimum; an endpoint
/// minimum means the bracket holds no interior optimum. Golden-section
/// search on log 𝒞_OM then refines it to relative tolerance 10⁻⁴.
pub fn find_optimum(
    spec: &SystemSpec,
    bracket: (f64, f64),
    settings: &SweepSettings,
) -> Result<Optimum> {
    let (lo, hi) = bracket;
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::invalid(
            "bracket",
            format!("need 0 < lo < hi, got [{lo}, {hi}]"),
        ));
    }
    let mut evaluations = 0;
    let mut f = |log_c: f64| -> Result<f64> {
        evaluations += 1;
        Ok(evaluate(&spec.with_cooperativity(log_c.exp())?, settings)?.n_eff)
    };

    let xs: Vec<f64> = log_space(lo, hi, SCAN_POINTS)
        .iter()
        .map(|c| c.ln())
        .collect();
    let ys = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let k = ys
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if k == 0 || k == SCAN_POINTS - 1 {
        return Err(Error::NoInteriorMinimum { lo, hi });
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (xs[k - 1], xs[k + 1]);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > LOG_TOLERANCE {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    let c_star = (0.5 * (a + b)).exp();
    let point = evaluate(&spec.with_cooperativity(c_star)?, settings)?;
    Ok(Optimum {
        c_om_star: c_star,
        n_eff_star: point.n_eff,
        n_ratio: point.n_eff / settings.baths.nbar_a,
        t_ratio: point.t_ratio,
        linewidth: point.linewidth,
        evaluations: evaluations + 1,
    })
}

/// What happens to the cooperativity as the modes are detuned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DetuningMode {
    /// Keep 𝒞_OM fixed.
    Fixed(f64),
    /// Re-optimize 𝒞_OM at every point within the bracket.
    Reoptimize { lo: f64, hi: f64 },
}

/// Occupation of mode `a` versus |ω_a − ω_b|, with ω_a fixed, ω_b = ω_a + δ
/// and the cavity kept on b's red sideband.
pub fn sweep_detuning(
    spec: &SystemSpec,
    deltas: &[f64],
    settings: &SweepSettings,
    mode: DetuningMode,
) -> SweepResult {
    let mut out = SweepResult::new("delta_ab");
    for &d in deltas {
        let point = check_non_negative("delta_ab", d)
            .and_then(|_| spec.with_omega_b(spec.mode_a.omega + d))
            .and_then(|s| match mode {
                DetuningMode::Fixed(c) => evaluate(&s.with_cooperativity(c)?, settings),
                DetuningMode::Reoptimize { lo, hi } => {
                    let opt = find_optimum(&s, (lo, hi), settings)?;
                    evaluate(&s.with_cooperativity(opt.c_om_star)?, settings)
                }
            });
        out.push(d, point);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{cooling_limit_ratio, optimal_cooperativity};
    use crate::presets;

    fn rwa_settings(spec: &SystemSpec, nbar: f64) -> SweepSettings {
        SweepSettings::new(spec, Fidelity::Rwa)
            .unwrap()
            .with_baths(ThermalBathSpec::uniform(nbar))
    }

    #[test]
    fn no_cooling_without_drive() {
        let spec = presets::weak_coupling(50.0).unwrap();
        let r = sweep_cooperativity(&spec, &[0.0], &rwa_settings(&spec, 1e3));
        assert!((r.t_ratio[0] - 1.0).abs() < 1e-12);
        assert!((r.n_eff[0] - 1e3).abs() < 1e-9);
    }

    #[test]
    fn rwa_sweep_is_the_closed_form() {
        let spec = presets::weak_coupling(50.0).unwrap();
        let settings = rwa_settings(&spec, 1e3);
        let values = default_cooperativity_grid();
        let r = sweep_cooperativity(&spec, &values, &settings);
        for (c, n) in values.iter().zip(&r.n_eff) {
            let s = spec.with_cooperativity(*c).unwrap();
            let cf = n_eff_closed_form(&s, s.optical_damping(), &settings.baths).unwrap();
            assert!((n / cf.n_eff - 1.0).abs() <= 1e-12);
        }
        let best = r.values[r.argmin().unwrap()];
        assert!((best / 51f64.sqrt() - 1.0).abs() < 0.05);
    }

    #[test]
    fn default_grid_density() {
        let g = default_cooperativity_grid();
        assert_eq!(g.len(), 301);
        assert!((g[0] - 1e-2).abs() < 1e-15);
        assert!((g[300] / 1e3 - 1.0).abs() < 1e-12);
        assert!((g[60] / 1e-1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rwa_optimum_c_ab_8() {
        let spec = presets::weak_coupling(8.0).unwrap();
        let opt = find_optimum(&spec, (1e-2, 1e3), &rwa_settings(&spec, 1e3)).unwrap();
        assert!((opt.c_om_star - 3.0).abs() < 1e-3);
        assert!((opt.n_ratio - 0.5).abs() < 1e-3);
    }

    #[test]
    fn rwa_optimum_is_local_minimum() {
        for c_ab in [2.0, 50.0, 900.0] {
            let spec = presets::weak_coupling(c_ab).unwrap();
            let settings = rwa_settings(&spec, 10.0);
            let opt = find_optimum(&spec, (1e-2, 1e4), &settings).unwrap();
            assert!((opt.c_om_star / optimal_cooperativity(c_ab).unwrap() - 1.0).abs() < 1e-4);
            assert!((opt.n_ratio / cooling_limit_ratio(c_ab).unwrap() - 1.0).abs() < 1e-6);
            for step in [1.0 - 1e-3, 1.0 + 1e-3] {
                let s = spec.with_cooperativity(opt.c_om_star * step).unwrap();
                assert!(evaluate(&s, &settings).unwrap().n_eff > opt.n_eff_star);
            }
        }
    }

    #[test]
    fn monotone_bracket_has_no_minimum() {
        let spec = presets::weak_coupling(8.0).unwrap();
        let err = find_optimum(&spec, (1e3, 1e4), &rwa_settings(&spec, 10.0)).unwrap_err();
        assert!(matches!(err, Error::NoInteriorMinimum { .. }));
    }

    #[test]
    fn bad_points_do_not_stop_the_sweep() {
        let spec = presets::weak_coupling(8.0).unwrap();
        let r = sweep_cooperativity(
            &spec,
            &[1.0, -2.0, f64::NAN, 3.0],
            &rwa_settings(&spec, 10.0),
        );
        assert_eq!(r.len(), 4);
        assert!(r.errors[0].is_none() && r.errors[3].is_none());
        assert!(r.errors[1].is_some() && r.errors[2].is_some());
        assert!(r.n_eff[1].is_nan());
    }

    #[test]
    fn detuning_warms_and_decouples() {
        let spec = presets::weak_coupling(50.0).unwrap();
        let settings = rwa_settings(&spec, 1e3);
        let c = 51f64.sqrt();
        let gb = spec.mode_b.gamma;
        let deltas: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25 * gb).collect();
        let r = sweep_detuning(&spec, &deltas, &settings, DetuningMode::Fixed(c));
        let degenerate = sweep_cooperativity(&spec, &[c], &settings);
        assert_eq!(r.n_eff[0], degenerate.n_eff[0]);
        assert!(r.n_eff.windows(2).all(|w| w[1] >= w[0]));

        let far = sweep_detuning(&spec, &[1e4 * gb], &settings, DetuningMode::Fixed(c));
        assert!((far.n_eff[0] / 1e3 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn detuned_optimum_shifts_and_shallows() {
        let spec = presets::weak_coupling(50.0).unwrap();
        let settings = rwa_settings(&spec, 1e3);
        let gb = spec.mode_b.gamma;
        let mode = DetuningMode::Reoptimize { lo: 1e-2, hi: 1e3 };
        let r = sweep_detuning(&spec, &[0.0, gb, 3.0 * gb], &settings, mode);
        assert!(r.n_eff.windows(2).all(|w| w[1] > w[0]), "{:?}", r.n_eff);
        let c0 = find_optimum(&spec, (1e-2, 1e3), &settings)
            .unwrap()
            .c_om_star;
        let s1 = spec.with_omega_b(1.0 + gb).unwrap();
        let c1 = find_optimum(&s1, (1e-2, 1e3), &settings).unwrap().c_om_star;
        assert!((c1 / c0 - 1.0).abs() > 0.01);
    }

    #[test]
    fn point_order_does_not_matter() {
        let spec = presets::weak_coupling(20.0).unwrap();
        let settings = rwa_settings(&spec, 5.0);
        let forward = [0.1, 1.0, 4.0, 30.0];
        let backward = [30.0, 4.0, 1.0, 0.1];
        let f = sweep_cooperativity(&spec, &forward, &settings);
        let b = sweep_cooperativity(&spec, &backward, &settings);
        for i in 0..4 {
            assert_eq!(f.n_eff[i].to_bits(), b.n_eff[3 - i].to_bits());
        }
    }
}
