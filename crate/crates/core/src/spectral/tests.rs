use super::*;
use crate::analytics::{chi_a, chi_b};
use crate::model::{build_system_with_baths, Fidelity, ThermalBathSpec};
use crate::presets;
use rand::{Rng, SeedableRng};

fn rwa(spec: &SystemSpec, nbar: f64) -> DriftModel {
    build_system_with_baths(spec, Fidelity::Rwa, &ThermalBathSpec::uniform(nbar))
}

fn occupation(model: &DriftModel, mode: ModeName) -> SpectrumResult {
    let grid = FrequencyGrid::for_model(model, &GridConfig::default()).unwrap();
    position_spectrum(model, mode, &grid).unwrap()
}

/// Steady-state covariance `AΣ + ΣA† + BNB† = 0` by Kronecker vectorization.
fn lyapunov(a: &DMatrix<Complex64>, q: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let conj = a.map(|z| z.conj());
    let k = id.kronecker(a) + conj.kronecker(&id);
    let rhs = -DVector::from_column_slice(q.as_slice());
    let x = k.lu().solve(&rhs).unwrap();
    DMatrix::from_column_slice(n, n, x.as_slice())
}

/// ⟨x²⟩ of mode `a` in the rotating-wave model, independent of any spectrum.
fn rwa_variance(model: &DriftModel, mode: ModeName) -> f64 {
    let b = &model.noise_input;
    let to_c = |d: &DMatrix<f64>| d.map(Complex64::from);
    let q_plus = b * to_c(&model.input_correlations) * b.adjoint();
    let q_minus = b * to_c(model.mirror_correlations.as_ref().unwrap()) * b.adjoint();
    let i = model.index_of(mode, false).unwrap();
    let s_plus = lyapunov(&model.drift, &q_plus);
    let s_minus = lyapunov(&model.drift, &q_minus);
    (s_plus[(i, i)] + s_minus[(i, i)]).re
}

#[test]
fn decoupled_resonant_entry() {
    let spec = presets::dimensionless(1e-3, 2e-2, 0.0, 0.1).unwrap();
    let model = rwa(&spec, 0.0);
    let chi = susceptibility_matrix(&model, 1.0).unwrap();
    assert!((chi[(1, 1)].norm() - 2.0 / 1e-3).abs() < 1e-9 * 2e3);
}

#[test]
fn residual_at_random_frequencies() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let spec = presets::weak_coupling(50.0)
        .unwrap()
        .with_cooperativity(7.0)
        .unwrap();
    for fidelity in [Fidelity::Rwa, Fidelity::Full] {
        let model = build_system_with_baths(&spec, fidelity, &ThermalBathSpec::uniform(3.0));
        for _ in 0..1000 {
            let w = rng.gen_range(-3.0..3.0);
            let m = resolvent(&model, w);
            let chi = susceptibility_matrix(&model, w).unwrap();
            assert!(susceptibility_residual(&m, &chi) <= RESIDUAL_TOLERANCE);
        }
    }
}

#[test]
fn rwa_entry_matches_closed_form() {
    let spec = presets::weak_coupling(50.0)
        .unwrap()
        .with_cooperativity(7.0)
        .unwrap();
    let gamma = spec.optical_damping();
    let model = rwa(&spec, 0.0);
    for dw in [-5e-4, -1e-4, 0.0, 1e-5, 2e-4, 5e-4] {
        let w = 1.0 + dw;
        let chi = susceptibility_matrix(&model, w).unwrap();
        let expected = chi_a(w, &spec, gamma) * (-I * spec.lambda * chi_b(w, &spec, gamma));
        let got = chi[(1, 2)];
        // The closed form treats the cavity as a pure damping; the residual
        // cavity dynamics enter at order (ω − ω_b)/κ.
        assert!(
            (got - expected).norm() / expected.norm() < 2e-2,
            "{dw}: {got} vs {expected}"
        );
    }
}

#[test]
fn rwa_entry_exact_without_cavity() {
    // With the cavity decoupled, χ_ab is exactly χ_a·(−iλχ_b).
    let spec = presets::dimensionless(1e-5, 1e-3, 1e-4, 0.05).unwrap();
    let model = rwa(&spec, 0.0);
    for dw in [-2e-3, -1e-4, 0.0, 3e-5, 5e-4] {
        let w = 1.0 + dw;
        let chi = susceptibility_matrix(&model, w).unwrap();
        let expected = chi_a(w, &spec, 0.0) * (-I * spec.lambda * chi_b(w, &spec, 0.0));
        assert!((chi[(1, 2)] - expected).norm() / expected.norm() < 1e-8);
    }
}

#[test]
fn marginal_system_is_singular_at_resonance() {
    let spec = presets::dimensionless(0.0, 0.0, 0.0, 0.1).unwrap();
    let model = rwa(&spec, 0.0);
    assert!(matches!(
        susceptibility_matrix(&model, 1.0),
        Err(Error::Singular { .. })
    ));
    assert!(matches!(
        FrequencyGrid::for_model(&model, &GridConfig::default()),
        Err(Error::Unstable { .. })
    ));
}

#[test]
fn bare_oscillator_is_thermal() {
    let spec = presets::dimensionless(1e-4, 1e-3, 0.0, 0.05).unwrap();
    for fidelity in [Fidelity::Rwa, Fidelity::Full] {
        let model = build_system_with_baths(&spec, fidelity, &ThermalBathSpec::uniform(100.0));
        let s = occupation(&model, ModeName::A);
        assert!(
            (s.n_eff / 100.0 - 1.0).abs() < 1e-3,
            "{fidelity}: {}",
            s.n_eff
        );
    }
}

#[test]
fn vacuum_has_no_excitations() {
    let spec = presets::weak_coupling(50.0)
        .unwrap()
        .with_cooperativity(7.0)
        .unwrap();
    let s = occupation(&rwa(&spec, 0.0), ModeName::A);
    assert!(s.occupation.n_eff.abs() < 1e-6, "{}", s.occupation.n_eff);
    assert_eq!(s.t_eff, if s.n_eff == 0.0 { 0.0 } else { s.t_eff });
}

#[test]
fn sideband_cooled_b_matches_covariance() {
    // Γ/κ = 3·10⁻³ keeps the cavity a Markovian damping channel for b.
    let spec = presets::dimensionless(1e-5, 1e-4, 0.0, 0.1)
        .unwrap()
        .with_cooperativity(3.0)
        .unwrap();
    let nbar = 50.0;
    let model = rwa(&spec, nbar);
    let a = occupation(&model, ModeName::A);
    let b = occupation(&model, ModeName::B);
    assert!((a.n_eff / nbar - 1.0).abs() < 1e-3);

    let gb = spec.mode_b.gamma;
    let gamma = spec.optical_damping();
    let simple = nbar * gb / (gb + gamma);
    assert!(
        (b.n_eff / simple - 1.0).abs() < 1e-2,
        "{} vs {simple}",
        b.n_eff
    );
    let exact = rwa_variance(&model, ModeName::B) / 2.0 - 0.5;
    assert!(
        (b.n_eff / exact - 1.0).abs() < 1e-4,
        "{} vs {exact}",
        b.n_eff
    );
}

#[test]
fn coupled_occupation_matches_covariance() {
    let spec = presets::weak_coupling(50.0)
        .unwrap()
        .with_cooperativity(7.0)
        .unwrap();
    let model = rwa(&spec, 1000.0);
    let s = occupation(&model, ModeName::A);
    let exact = rwa_variance(&model, ModeName::A) / 2.0 - 0.5;
    assert!(
        (s.n_eff / exact - 1.0).abs() < 1e-4,
        "{} vs {exact}",
        s.n_eff
    );
}

#[test]
fn full_model_matches_covariance() {
    let spec = presets::weak_coupling(8.0)
        .unwrap()
        .with_cooperativity(3.0)
        .unwrap();
    let model = build_system_with_baths(&spec, Fidelity::Full, &ThermalBathSpec::uniform(20.0));
    let s = occupation(&model, ModeName::A);

    let to_c = |d: &DMatrix<f64>| d.map(Complex64::from);
    let b = &model.noise_input;
    let q = b * to_c(&model.input_correlations) * b.adjoint();
    let sigma = lyapunov(&model.drift, &q);
    // ⟨(a + a†)²⟩ from ⟨v v†⟩ with v = (a, a†, ...)
    let x2: Complex64 = sigma[(0, 0)] + sigma[(0, 1)] + sigma[(1, 0)] + sigma[(1, 1)];
    let exact = x2.re / 2.0 - 0.5;
    assert!(
        (s.n_eff / exact - 1.0).abs() < 1e-4,
        "{} vs {exact}",
        s.n_eff
    );
}

#[test]
fn refinement_changes_little() {
    let spec = presets::weak_coupling(50.0)
        .unwrap()
        .with_cooperativity(7.0)
        .unwrap();
    for fidelity in [Fidelity::Rwa, Fidelity::Full] {
        let model = build_system_with_baths(&spec, fidelity, &ThermalBathSpec::uniform(10.0));
        let grid = FrequencyGrid::for_model(&model, &GridConfig::default()).unwrap();
        let coarse = position_spectrum(&model, ModeName::A, &grid).unwrap();
        let fine = position_spectrum(&model, ModeName::A, &grid.refined()).unwrap();
        assert!((fine.n_eff / coarse.n_eff - 1.0).abs() < 1e-3);
    }
}

#[test]
fn narrow_grid_reports_coverage() {
    let spec = presets::dimensionless(1e-4, 1e-3, 0.0, 0.05).unwrap();
    let model = rwa(&spec, 10.0);
    let narrow = GridConfig {
        span_linewidths: 5.0,
        core_linewidths: 5.0,
        ..GridConfig::default()
    };
    let anchors = [Anchor {
        center: 1.0,
        linewidth: 1e-4,
    }];
    let grid = FrequencyGrid::around(&anchors, &narrow).unwrap();
    let err = integrate_occupation(
        grid.points(),
        &position_spectrum_values(&model, ModeName::A, grid.points()).unwrap(),
        1.0,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Coverage { .. }), "{err}");
}

#[test]
fn fitted_lorentzian_area_maps_to_occupation() {
    let spec = presets::dimensionless(1e-4, 1e-3, 0.0, 0.05).unwrap();
    let mut s = occupation(&rwa(&spec, 30.0), ModeName::A);
    let fit = s.fit_line((1.0 - 5e-3, 1.0 + 5e-3)).unwrap();
    assert!((fit.center - 1.0).abs() < 1e-8);
    assert!((fit.fwhm / 1e-4 - 1.0).abs() < 1e-6);
    // The (n̄+1) Lorentzian at +ω carries ⟨x²⟩ − n̄; the n̄ copy sits at −ω.
    let n_from_area = fit.area / (2.0 * std::f64::consts::PI) - 1.0;
    assert!((n_from_area / 30.0 - 1.0).abs() < 1e-3, "{n_from_area}");
}

#[test]
fn line_narrows_and_cools_toward_optimum() {
    let base = presets::weak_coupling(8.0).unwrap();
    let mut areas = Vec::new();
    let mut widths = Vec::new();
    let mut peaks = Vec::new();
    for c_om in [0.0, 0.5, 1.0, 2.0, 3.0] {
        let spec = base.with_cooperativity(c_om).unwrap();
        let mut s = occupation(&rwa(&spec, 100.0), ModeName::A);
        areas.push(s.n_eff);
        peaks.push(s.peak().1);
        let half = 10.0 * spec.mode_a.gamma * 3.0;
        widths.push(s.fit_line((1.0 - half, 1.0 + half)).unwrap().fwhm);
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    assert!(decreasing(&areas), "{areas:?}");
    assert!(decreasing(&widths), "{widths:?}");
    // The width shrinks faster than the occupation, so the peak grows.
    assert!(!decreasing(&peaks), "{peaks:?}");
    let target = base.mode_a.gamma * 3.0;
    assert!((widths[4] / target - 1.0).abs() < 0.03);
}

#[test]
fn force_noise_bare_oscillator_is_flat() {
    let spec = presets::dimensionless(1e-4, 1e-3, 0.0, 0.05).unwrap();
    let nbar = 1e4;
    let model = rwa(&spec, nbar);
    let grid = FrequencyGrid::for_model(&model, &GridConfig::default()).unwrap();
    let f = force_spectrum_numeric(&model, &spec, &grid).unwrap();
    let expected = analytics::force_prefactor(&spec) * spec.mode_a.gamma * (2.0 * nbar + 1.0);
    assert!(f.s_ff.iter().all(|s| (s / expected - 1.0).abs() < 1e-12));
}

#[test]
fn force_noise_scales_with_mass() {
    let spec = presets::weak_coupling(50.0)
        .unwrap()
        .with_cooperativity(2.0)
        .unwrap();
    let mut heavy = spec;
    heavy.mass_a *= 2.0;
    let model = rwa(&spec, 100.0);
    for w in [0.999, 1.0, 1.0003] {
        let light = force_noise_at(&model, &spec, w).unwrap();
        let double = force_noise_at(&model, &heavy, w).unwrap();
        assert!((double / light - 2.0).abs() < 1e-12);
    }
}

#[test]
fn force_noise_factor_at_optimum() {
    let spec = presets::weak_coupling(50.0)
        .unwrap()
        .with_cooperativity(51f64.sqrt())
        .unwrap();
    for fidelity in [Fidelity::Rwa, Fidelity::Full] {
        let model = build_system_with_baths(&spec, fidelity, &ThermalBathSpec::uniform(1e5));
        let factor = force_noise_factor_numeric(&model, &spec, 1.0).unwrap();
        let expected = analytics::force_noise_factor(50.0, 51f64.sqrt());
        assert!(
            (factor / expected - 1.0).abs() < 0.05,
            "{fidelity}: {factor}"
        );
    }
}
