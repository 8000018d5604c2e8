//! Position spectrum of mode a from the exact solver, with a Lorentzian fit.
//!
//! Run with `cargo run --release --example position_spectrum [rwa|full]`.

use optobath::analytics::optimal_cooperativity;
use optobath::spectral::position_spectrum;
use optobath::ThermalBathSpec;
use optobath::{build_system_with_baths, presets, Fidelity, FrequencyGrid, GridConfig, ModeName};

fn main() -> optobath::Result<()> {
    let fidelity = match std::env::args().nth(1).as_deref() {
        Some("full") => Fidelity::Full,
        _ => Fidelity::Rwa,
    };
    let spec = presets::weak_coupling(50.0)?;
    let c_star = optimal_cooperativity(50.0)?;
    let baths = ThermalBathSpec::uniform(1000.0);

    for c_om in [0.0, 1.0, c_star, 20.0] {
        let s_spec = spec.with_cooperativity(c_om)?;
        let model = build_system_with_baths(&s_spec, fidelity, &baths);
        let grid = FrequencyGrid::for_model(&model, &GridConfig::default())?;
        let mut s = position_spectrum(&model, ModeName::A, &grid)?;
        let half = 40.0 * s_spec.mode_a.gamma * (1.0 + 50.0 / (1.0 + c_om));
        let fit = s.fit_line((1.0 - half, 1.0 + half))?;
        println!(
            "{fidelity} C_OM = {c_om:6.3}: n_eff/nbar = {:.4}, fwhm/gamma_a = {:.3}, {} grid points",
            s.n_eff / baths.nbar_a,
            fit.fwhm / s_spec.mode_a.gamma,
            s.omega.len(),
        );
    }
    Ok(())
}
