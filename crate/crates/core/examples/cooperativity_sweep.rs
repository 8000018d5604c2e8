//! Occupation of mode a across optomechanical cooperativity, both fidelities.
//!
//! Run with `cargo run --release --example cooperativity_sweep`.

use optobath::analytics::n_eff_closed_form;
use optobath::sweep::{log_space, sweep_cooperativity, SweepSettings};
use optobath::{presets, Fidelity, ThermalBathSpec};

fn main() -> optobath::Result<()> {
    let spec = presets::cross_fidelity()?;
    let baths = ThermalBathSpec::uniform(1000.0);
    let c_om = log_space(0.3, 30.0, 10);

    let rwa = SweepSettings::new(&spec, Fidelity::Rwa)?.with_baths(baths);
    let full = SweepSettings::new(&spec, Fidelity::Full)?.with_baths(baths);
    let a = sweep_cooperativity(&spec, &c_om, &rwa);
    let b = sweep_cooperativity(&spec, &c_om, &full);

    println!(
        "{:>8} {:>12} {:>12} {:>10}",
        "C_OM", "closed form", "6-component", "rel. diff"
    );
    for ((c, na), nb) in c_om.iter().zip(&a.n_eff).zip(&b.n_eff) {
        println!(
            "{c:>8.3} {na:>12.3} {nb:>12.3} {:>10.2e}",
            (nb / na - 1.0).abs()
        );
    }

    // Direct check of one point against the closed form.
    let at = spec.with_cooperativity(c_om[5])?;
    let cf = n_eff_closed_form(&at, at.optical_damping(), &baths)?;
    assert_eq!(cf.n_eff, a.n_eff[5]);
    Ok(())
}
