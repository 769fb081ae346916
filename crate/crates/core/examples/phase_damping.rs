//! Phase damping of the θ = π/6 state: heat flows in, coherence drains out,
//! and the two cancel so the internal energy never moves.
//!
//! cargo run --example phase_damping

use std::f64::consts::FRAC_PI_6;

use qfirstlaw::channel::ChannelSpec;
use qfirstlaw::firstlaw::{run, TimeGrid};
use qfirstlaw::oracle::{pd_heat, OracleConfig};
use qfirstlaw::qstate::{prepare_pure_state, Hamiltonian, InitialStatePrep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho0 = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0));
    let h = Hamiltonian::two_level(0.0, 1.0);
    let grid = TimeGrid::default();
    let (traj, ledger) = run(&ChannelSpec::phase_damping(1.0), &rho0, &h, &grid)?;
    let cfg = OracleConfig::pi_over_six(0.0, 1.0)?;

    println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>10}", "tau", "heat", "closed form", "coherence", "delta_u", "rho_max");
    for i in (0..=grid.steps()).step_by(400) {
        let r = &ledger.rows[i];
        let rho_max = traj.snapshots[i].eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        println!(
            "{:>6.2} {:>12.8} {:>12.8} {:>12.8} {:>12.2e} {:>10.6}",
            r.tau,
            r.heat,
            pd_heat(r.tau, &cfg),
            r.coherence,
            r.delta_u,
            rho_max
        );
    }
    println!("max |Q + C| = {:.2e}", ledger.max_abs(|r| r.heat + r.coherence));
    println!("max |Q - closed form| = {:.2e}", ledger.max_abs(|r| r.heat - pd_heat(r.tau, &cfg)));
    Ok(())
}
