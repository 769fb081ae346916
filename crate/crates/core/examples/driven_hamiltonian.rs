//! A Hamiltonian diag(0, 1 + 0.1t) with no channel at all: every bit of
//! energy change is work.
//!
//! cargo run --example driven_hamiltonian

use std::f64::consts::FRAC_PI_6;

use qfirstlaw::channel::ChannelSpec;
use qfirstlaw::firstlaw::{run, TimeGrid};
use qfirstlaw::qstate::{prepare_pure_state, Hamiltonian, InitialStatePrep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = Hamiltonian::parse_diagonal(&["0", "1+0.1*t"])?;
    let rho0 = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0));
    let (_, ledger) = run(&ChannelSpec::identity(2), &rho0, &h, &TimeGrid::new(8.0, 800)?)?;

    println!("{:>5} {:>10} {:>10} {:>8} {:>8}", "tau", "delta_u", "work", "heat", "coh");
    for r in ledger.rows.iter().step_by(100) {
        println!("{:>5.1} {:>10.6} {:>10.6} {:>8.1e} {:>8.1e}", r.tau, r.delta_u, r.work, r.heat, r.coherence);
    }

    // Driving plus dephasing: all three terms are live at once.
    let (_, both) = run(&ChannelSpec::phase_damping(1.0), &rho0, &h, &TimeGrid::default())?;
    let last = both.last();
    println!(
        "with phase damping at tau=8: W={:.6} Q={:.6} C={:.6}, closure residual {:.1e}",
        last.work,
        last.heat,
        last.coherence,
        both.max_closure_residual()
    );
    Ok(())
}
