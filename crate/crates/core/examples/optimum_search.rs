//! Numerical optimum of the occupation over C_OM, compared with sqrt(1 + C_ab).
//!
//! Run with `cargo run --release --example optimum_search`.

use optobath::analytics::{cooling_limit_ratio, optimal_cooperativity};
use optobath::sweep::{find_optimum, SweepSettings};
use optobath::{presets, Fidelity, ThermalBathSpec};

fn main() -> optobath::Result<()> {
    let baths = ThermalBathSpec::uniform(1000.0);
    for c_ab in [8.0, 50.0, 200.0] {
        let spec = presets::weak_coupling(c_ab)?;
        for fidelity in [Fidelity::Rwa, Fidelity::Full] {
            let settings = SweepSettings::new(&spec, fidelity)?.with_baths(baths);
            let start = std::time::Instant::now();
            let opt = find_optimum(&spec, (0.1, 100.0), &settings)?;
            println!(
                "C_ab = {c_ab:>5} {fidelity:>4}: C_OM* = {:.4} (expect {:.4}), n*/nbar = {:.5} (expect {:.5}), {} evaluations in {:.2?}",
                opt.c_om_star,
                optimal_cooperativity(c_ab)?,
                opt.n_ratio,
                cooling_limit_ratio(c_ab)?,
                opt.evaluations,
                start.elapsed(),
            );
        }
    }
    Ok(())
}
