use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use optobath::analytics::{
    cooling_limit_ratio, force_noise_factor, n_eff_closed_form, optimal_cooperativity,
};
use optobath::cli::parse_config;
use optobath::model::{effective_temperature, thermal_occupation};
use optobath::spectral::{
    force_noise_factor_numeric, model_anchors, position_spectrum, position_spectrum_values,
    susceptibility_matrix, susceptibility_residual,
};
use optobath::{
    build_system_with_baths, presets, Fidelity, FrequencyGrid, GridConfig, ModeName, SystemSpec,
    ThermalBathSpec,
};

fn fidelity() -> impl Strategy<Value = Fidelity> {
    prop_oneof![Just(Fidelity::Rwa), Just(Fidelity::Full)]
}

/// Stable dimensionless configurations, modes detuned by up to 10 γ_b.
fn config() -> impl Strategy<Value = (SystemSpec, ThermalBathSpec)> {
    (
        -6.0..-4.0f64,
        -4.0..-2.0f64,
        -6.0..-3.0f64,
        -2.0..-1.0f64,
        0.0..10.0f64,
        0.0..1.0f64,
        (0.0..1000.0f64, 0.0..1000.0f64, 0.0..1.0f64),
    )
        .prop_map(|(ga, gb, lam, ka, delta, c_frac, (na, nb, nc))| {
            let (gamma_a, gamma_b, kappa) = (10f64.powf(ga), 10f64.powf(gb), 10f64.powf(ka));
            let spec = presets::dimensionless(gamma_a, gamma_b, 10f64.powf(lam), kappa)
                .and_then(|s| s.with_omega_b(1.0 + delta * gamma_b))
                .unwrap();
            let c_max = (4.0 * 1e-4 / (kappa * gamma_b)).min(100.0);
            let spec = spec.with_cooperativity(c_frac * c_max).unwrap();
            let baths = ThermalBathSpec {
                nbar_a: na,
                nbar_b: nb,
                nbar_c: nc,
            };
            (spec, baths)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn susceptibility_inverts_resolvent((spec, baths) in config(), fid in fidelity(), w in -2.0..2.0f64) {
        let model = build_system_with_baths(&spec, fid, &baths);
        let chi = susceptibility_matrix(&model, w).unwrap();
        let n = model.dimension();
        let m = DMatrix::<Complex64>::identity(n, n) * Complex64::new(0.0, -w) - &model.drift;
        prop_assert!(susceptibility_residual(&m, &chi) <= 1e-10);
    }

    #[test]
    fn spectra_are_non_negative((spec, baths) in config(), fid in fidelity()) {
        let model = build_system_with_baths(&spec, fid, &baths);
        let grid = FrequencyGrid::for_model(&model, &GridConfig::default()).unwrap();
        for mode in [ModeName::A, ModeName::B] {
            let raw = position_spectrum_values(&model, mode, grid.points()).unwrap();
            let peak = raw.iter().copied().fold(0.0, f64::max);
            prop_assert!(raw.iter().all(|&v| v >= -1e-10 * peak));
        }
    }

    #[test]
    fn occupation_between_bath_extremes((spec, baths) in config()) {
        let model = build_system_with_baths(&spec, Fidelity::Rwa, &baths);
        let grid = FrequencyGrid::for_model(&model, &GridConfig::default()).unwrap();
        let n = position_spectrum(&model, ModeName::A, &grid).unwrap().n_eff;
        let lo = baths.nbar_a.min(baths.nbar_b).min(baths.nbar_c);
        let hi = baths.nbar_a.max(baths.nbar_b).max(baths.nbar_c);
        let tol = 1e-4 * hi + 1e-6;
        prop_assert!(n >= lo - tol && n <= hi + tol, "{n} not in [{lo}, {hi}]");
    }

    #[test]
    fn grid_covers_every_resonance((spec, baths) in config(), fid in fidelity()) {
        let model = build_system_with_baths(&spec, fid, &baths);
        let anchors = model_anchors(&model).unwrap();
        let grid = FrequencyGrid::for_model(&model, &GridConfig::default()).unwrap();
        let p = grid.points();
        prop_assert!(p.windows(2).all(|w| w[1] > w[0]));
        for a in anchors {
            prop_assert!(p[0] <= a.center - 50.0 * a.linewidth * (1.0 - 1e-12));
            prop_assert!(p[p.len() - 1] >= a.center + 50.0 * a.linewidth * (1.0 - 1e-12));
        }
    }

    #[test]
    fn closed_form_optimum_is_a_minimum(c_ab in 0.0..1e4f64, shift in 0.5..2.0f64) {
        let c_star = optimal_cooperativity(c_ab).unwrap();
        prop_assume!((shift - 1.0).abs() > 1e-3);
        let spec = presets::weak_coupling(c_ab.max(1e-3)).unwrap();
        let baths = ThermalBathSpec::uniform(100.0);
        let c_star = if c_ab < 1e-3 { optimal_cooperativity(1e-3).unwrap() } else { c_star };
        let n = |c: f64| {
            let at = spec.with_cooperativity(c).unwrap();
            n_eff_closed_form(&at, at.optical_damping(), &baths).unwrap().n_eff
        };
        prop_assert!(n(c_star) <= n(c_star * shift));
    }

    #[test]
    fn cooling_limit_decreases_with_mechanical_cooperativity(a in 0.0..1e4f64, b in 0.0..1e4f64) {
        prop_assume!(a < b);
        prop_assert!(cooling_limit_ratio(b).unwrap() < cooling_limit_ratio(a).unwrap());
    }

    #[test]
    fn force_bracket_decreases(c_ab in 0.0..1e4f64, a in 0.0..1e3f64, b in 0.0..1e3f64) {
        prop_assume!(a < b);
        prop_assert!(force_noise_factor(c_ab, b) <= force_noise_factor(c_ab, a));
        prop_assert!(force_noise_factor(c_ab, a) >= 1.0);
    }

    #[test]
    fn temperature_round_trip(omega in 1.0..1e10f64, t in 1e-3..1e3f64) {
        let n = thermal_occupation(omega, t).unwrap();
        let back = effective_temperature(n, omega).unwrap();
        prop_assert!((back / t - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hertz_inputs_scale_by_two_pi(f in 1.0..1e7f64, q in 10.0..1e4f64) {
        let text = format!(
            "task = \"spectrum\"\n[mode_a]\nomega = {f:e}\ngamma = {:e}\n[mode_b]\nomega = {f:e}\ngamma = {:e}\n[cavity]\nkappa = {:e}\n[coupling]\nlambda = 0.0\n",
            f / q, 10.0 * f / q, f / 10.0
        );
        let spec = parse_config(&text).unwrap().system.unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        prop_assert!((spec.mode_a.omega / (two_pi * f) - 1.0).abs() < 1e-15);
        prop_assert!((spec.mode_b.gamma / (two_pi * 10.0 * f / q) - 1.0).abs() < 1e-15);
    }
}

/// Detuned modes: optical damping of b then adds cavity noise faster than it
/// removes mechanical noise from a, so the force bracket rises with 𝒞_OM.
#[test]
fn force_bracket_rises_for_detuned_modes() {
    let gamma_b = 1e-3;
    let spec = presets::dimensionless(1e-5, gamma_b, 1e-4, 0.05)
        .unwrap()
        .with_omega_b(1.0 + 20.0 * gamma_b)
        .unwrap();
    let baths = ThermalBathSpec::uniform(0.0);
    let factor = |c: f64| {
        let at = spec.with_cooperativity(c).unwrap();
        let model = build_system_with_baths(&at, Fidelity::Rwa, &baths);
        force_noise_factor_numeric(&model, &at, 1.0).unwrap()
    };
    assert!(factor(1.0) > factor(0.0));
}
