//! Thermal force noise on mode a versus cooperativity.
//!
//! Run with `cargo run --release --example force_sensing`.

use optobath::analytics::{force_noise_factor, force_noise_psd, optimal_cooperativity};
use optobath::spectral::{force_noise_at, force_noise_factor_numeric};
use optobath::{build_system, presets, Fidelity};

fn main() -> optobath::Result<()> {
    let base = presets::resonator_si(300.0)?;
    let c_ab = base.c_ab();
    let c_star = optimal_cooperativity(c_ab)?;

    println!(
        "{:>8} {:>12} {:>12} {:>14}",
        "C_OM", "closed form", "numeric", "S_FF [N²/Hz]"
    );
    for c_om in [0.0, 1.0, 3.0, c_star, 30.0] {
        let spec = base.with_cooperativity(c_om)?;
        let model = build_system(&spec, Fidelity::Full);
        let w = spec.mode_a.omega;
        println!(
            "{c_om:>8.3} {:>12.4} {:>12.4} {:>14.4e}",
            force_noise_factor(c_ab, c_om),
            force_noise_factor_numeric(&model, &spec, w)?,
            force_noise_at(&model, &spec, w)?,
        );
    }

    let at = base.with_cooperativity(c_star)?;
    let noise = force_noise_psd(&at, at.optical_damping(), 300.0)?;
    println!(
        "\nat the optimum the force noise is {:.1}x below direct optical cooling of mode a",
        noise.reduction()
    );
    Ok(())
}
