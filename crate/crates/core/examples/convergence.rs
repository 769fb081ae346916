//! Halving the step size cuts the heat error by four: the quadrature is
//! second order.
//!
//! cargo run --example convergence

use std::f64::consts::FRAC_PI_6;

use qfirstlaw::channel::ChannelSpec;
use qfirstlaw::firstlaw::{run, TimeGrid};
use qfirstlaw::oracle::{pd_heat, OracleConfig};
use qfirstlaw::qstate::{prepare_pure_state, Hamiltonian, InitialStatePrep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho0 = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0));
    let h = Hamiltonian::two_level(0.0, 1.0);
    let cfg = OracleConfig::pi_over_six(0.0, 1.0)?;
    let mut prev: Option<f64> = None;
    println!("{:>6} {:>12} {:>8}", "steps", "max error", "ratio");
    for steps in [125, 250, 500, 1000, 2000, 4000] {
        let (_, ledger) = run(&ChannelSpec::phase_damping(1.0), &rho0, &h, &TimeGrid::new(8.0, steps)?)?;
        let err = ledger.max_abs(|r| r.heat - pd_heat(r.tau, &cfg));
        let ratio = prev.map_or(String::new(), |p| format!("{:.4}", p / err));
        println!("{steps:>6} {err:>12.4e} {ratio:>8}");
        prev = Some(err);
    }
    Ok(())
}
