//! Ground-state threshold: C_ab = 16 nbar² reaches n_eff < 1.
//!
//! Run with `cargo run --release --example ground_state`.

use optobath::sweep::{find_optimum, SweepSettings};
use optobath::{presets, Fidelity, ThermalBathSpec};

fn main() -> optobath::Result<()> {
    for nbar in [1.0, 2.0, 5.0, 20.0] {
        let c_ab = 16.0 * nbar * nbar;
        let spec = presets::dimensionless(4.0 * 1e-8 / (c_ab * 1e-3), 1e-3, 1e-4, 0.05)?;
        let settings =
            SweepSettings::new(&spec, Fidelity::Rwa)?.with_baths(ThermalBathSpec::uniform(nbar));
        let opt = find_optimum(&spec, (0.1, 1e4), &settings)?;
        println!(
            "nbar = {nbar:>4}: C_ab = {c_ab:>6}, C_OM* = {:.3}, n_eff = {:.4}",
            opt.c_om_star, opt.n_eff_star
        );
    }
    Ok(())
}
