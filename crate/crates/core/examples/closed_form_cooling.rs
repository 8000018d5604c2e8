//! Rotating-wave cooling limits for a few mechanical cooperativities.
//!
//! Run with `cargo run --example closed_form_cooling`.

use optobath::analytics::{cooling_limit_ratio, narrowed_linewidth, optimal_cooperativity};
use optobath::presets;

fn main() -> optobath::Result<()> {
    println!(
        "{:>6} {:>10} {:>12} {:>16}",
        "C_ab", "C_OM*", "n*/nbar", "width/gamma_a"
    );
    for c_ab in [1.0, 8.0, 50.0, 200.0, 1000.0] {
        println!(
            "{:>6} {:>10.4} {:>12.5} {:>16.4}",
            c_ab,
            optimal_cooperativity(c_ab)?,
            cooling_limit_ratio(c_ab)?,
            narrowed_linewidth(1.0, c_ab)?,
        );
    }

    // The same numbers from a concrete parameter set driven at its optimum.
    let spec = presets::resonator_si(4.0)?;
    let spec = spec.with_cooperativity(optimal_cooperativity(spec.c_ab())?)?;
    let s = optobath::analytics::cooling_summary(&spec)?;
    let nbar = spec.thermal_baths()?.nbar_a;
    println!();
    println!(
        "resonator at 4 K: C_ab = {:.2}, C_OM = {:.3}",
        s.c_ab, s.c_om
    );
    println!(
        "  nbar = {nbar:.1}, n_eff = {:.1} ({:.4} of nbar)",
        s.n_eff,
        s.n_eff / nbar
    );
    println!("  linewidth of mode a = {:.3} rad/s", s.linewidth_a);
    println!("  all regime conditions hold: {}", s.flags.all());
    Ok(())
}
