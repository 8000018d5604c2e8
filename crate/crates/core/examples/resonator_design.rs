//! From cantilever geometry to the coupled-mode model.
//!
//! Run with `cargo run --example resonator_design`.

use optobath::analytics::{cooling_limit_ratio, optimal_cooperativity};
use optobath::design::{
    cantilever_frequency, clamping_q, default_clamping_calibration, design_to_system,
    ted_quality_factor, BeamGeometry, MaterialDb,
};
use optobath::CavityDrive;
use std::f64::consts::PI;

fn main() -> optobath::Result<()> {
    let db = MaterialDb::builtin();
    let sin = db.lookup("SiN")?;
    let cal = default_clamping_calibration();

    let omega = cantilever_frequency(20e-6, 0.3e-6, sin);
    println!(
        "20 µm x 0.3 µm SiN: f0 = {:.4} MHz",
        omega / (2.0 * PI) / 1e6
    );
    println!("  clamping Q = {:.4e}", clamping_q(20e-6, 0.3e-6, cal)?);
    println!(
        "  TED Q at 300 K = {:.3e}",
        ted_quality_factor(sin, 300.0, 0.3e-6, omega)?
    );

    // A length mismatch splits the arm frequencies and sets the coupling λ.
    for mismatch in [0.0, 1e-6, 1e-5, 1e-4] {
        let geometry = BeamGeometry {
            l_left: 20e-6 * (1.0 + mismatch),
            l_right: 20e-6 * (1.0 - mismatch),
            h: 0.3e-6,
            w: 0.5e-6,
            thickness: 0.3e-6,
        };
        let cavity = CavityDrive::from_alpha(0.1 * omega, -omega, 0.0, 0.0.into())?;
        let r = design_to_system(&geometry, sin, 300.0, &cavity, cal)?;
        print!(
            "mismatch {mismatch:.0e}: λ = {:.3e} rad/s, C_ab = {:.3e}",
            r.budget.lambda, r.c_ab
        );
        if r.c_ab > 0.0 && r.c_ab.is_finite() {
            print!(
                ", C_OM* = {:.3e}, n*/nbar = {:.3e}",
                optimal_cooperativity(r.c_ab)?,
                cooling_limit_ratio(r.c_ab)?
            );
        }
        if !r.warnings.is_empty() {
            print!("  [{}]", r.warnings.join("; "));
        }
        println!();
    }
    Ok(())
}
