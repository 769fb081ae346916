//! Bit flip and bit-phase flip are phase flip seen in another basis. Rotating
//! both the state and the Hamiltonian by the unitary that maps σ_z to σ_x or
//! σ_y gives the same heat and coherence curves.
//!
//! cargo run --example pauli_symmetry

use std::f64::consts::FRAC_PI_6;

use qfirstlaw::channel::ChannelSpec;
use qfirstlaw::firstlaw::{run, TimeGrid};
use qfirstlaw::qstate::{prepare_pure_state, Hamiltonian, InitialStatePrep};
use qfirstlaw::verify::rotated_setup;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TimeGrid::default();
    let rho0 = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0));
    let (_, reference) = run(&ChannelSpec::phase_flip(1.0), &rho0, &Hamiltonian::two_level(0.0, 1.0), &grid)?;

    for spec in [ChannelSpec::bit_flip(1.0), ChannelSpec::bit_phase_flip(1.0)] {
        let (rho, h) = rotated_setup(&spec.kind, FRAC_PI_6, 0.0, 1.0);
        let (_, ledger) = run(&spec, &rho, &h, &grid)?;
        let diff = ledger
            .rows
            .iter()
            .zip(&reference.rows)
            .map(|(a, b)| (a.heat - b.heat).abs().max((a.coherence - b.coherence).abs()))
            .fold(0.0, f64::max);
        println!("{:<15} max |dQ|, |dC| vs phase flip: {:.2e}", spec.name(), diff);
    }

    // Without the rotation bit flip moves population, so energy changes too.
    let (_, z) = run(&ChannelSpec::bit_flip(1.0), &rho0, &Hamiltonian::two_level(0.0, 1.0), &grid)?;
    let last = z.last();
    println!(
        "bit flip, z basis: delta_u={:.6} heat={:.6} coherence={:.6} closure residual={:.1e}",
        last.delta_u,
        last.heat,
        last.coherence,
        z.max_closure_residual()
    );
    Ok(())
}
