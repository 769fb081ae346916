//! Phase flip: the heat rises to ln4/8 at τ = ln 2, where the off-diagonal
//! factor 2e^{−τ} − 1 passes through zero, then falls back.
//!
//! cargo run --example phase_flip

use std::f64::consts::{FRAC_PI_6, LN_2};

use qfirstlaw::channel::ChannelSpec;
use qfirstlaw::firstlaw::{run, TimeGrid};
use qfirstlaw::oracle::{pf_heat, OracleConfig};
use qfirstlaw::qstate::{prepare_pure_state, Hamiltonian, InitialStatePrep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho0 = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0));
    let grid = TimeGrid::default();

    for (e_g, e_e) in [(0.0, 1.0), (0.3, 1.7)] {
        let h = Hamiltonian::two_level(e_g, e_e);
        let (_, ledger) = run(&ChannelSpec::phase_flip(1.0), &rho0, &h, &grid)?;
        let cfg = OracleConfig::pi_over_six(e_g, e_e)?;
        let peak = ledger.rows.iter().max_by(|a, b| a.heat.total_cmp(&b.heat)).unwrap();
        let mut err: f64 = 0.0;
        for r in &ledger.rows {
            err = err.max((r.heat - pf_heat(r.tau, &cfg)?).abs());
        }
        println!("E_g={e_g} E_e={e_e}");
        println!("  heat peak {:.8} at tau={:.3} (ln 2 = {:.3})", peak.heat, peak.tau, LN_2);
        println!("  (E_e - E_g) ln4/8 = {:.8}", (e_e - e_g) * 4f64.ln() / 8.0);
        println!("  Q(8) = {:.6e}, max |Q - closed form| = {:.2e}", ledger.last().heat, err);
    }
    Ok(())
}
