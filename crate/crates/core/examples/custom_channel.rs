//! Channels written as expressions in t, loaded from JSON. The first file
//! rebuilds phase damping; the second stops being trace preserving at t = 3
//! and the trajectory refuses to go past it.
//!
//! cargo run --example custom_channel

use std::f64::consts::FRAC_PI_6;
use std::path::Path;

use qfirstlaw::channel::{kraus_at, validate_cptp, ChannelSpec, CustomChannel};
use qfirstlaw::firstlaw::{run, TimeGrid};
use qfirstlaw::qstate::{prepare_pure_state, Hamiltonian, InitialStatePrep};

fn load(name: &str) -> Result<ChannelSpec, Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name);
    let (channel, rate) = CustomChannel::from_json(&std::fs::read_to_string(path)?)?;
    Ok(ChannelSpec::custom(channel, rate.unwrap_or(1.0))?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho0 = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0));
    let h = Hamiltonian::two_level(0.0, 1.0);
    let grid = TimeGrid::new(8.0, 2000)?;

    let custom = load("custom_dephasing.json")?;
    let (_, a) = run(&custom, &rho0, &h, &grid)?;
    let (_, b) = run(&ChannelSpec::phase_damping(1.0), &rho0, &h, &grid)?;
    let diff = a.rows.iter().zip(&b.rows).map(|(x, y)| (x.heat - y.heat).abs()).fold(0.0, f64::max);
    println!("custom dephasing vs builtin: max |dQ| = {diff:.2e}");

    let leaky = load("leaky_after_t3.json")?;
    for t in [0.0, 2.0, 3.0, 4.0] {
        let report = validate_cptp(&kraus_at(&leaky, t)?, 1e-10);
        println!("leaky channel at t={t}: {report}");
    }
    match run(&leaky, &rho0, &h, &TimeGrid::new(10.0, 10)?) {
        Ok(_) => println!("unexpectedly ran to the end"),
        Err(e) => println!("trajectory stopped: {e}"),
    }
    Ok(())
}
