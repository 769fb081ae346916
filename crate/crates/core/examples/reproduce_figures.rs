//! Writes the data behind both figures and their reports into a directory,
//! exactly as `qfirstlaw reproduce` does.
//!
//! cargo run --example reproduce_figures -- [out_dir]

use qfirstlaw::cli::{figure_report, run_experiment, Figure};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1).unwrap_or_else(|| "figures".into());
    std::fs::create_dir_all(&out_dir)?;
    for fig in [Figure::Fig2, Figure::Fig3] {
        let exp = run_experiment(&fig.config())?;
        let path = std::path::Path::new(&out_dir).join(format!("{}.csv", fig.name()));
        exp.csv.write_to(&path)?;
        println!("{}", path.display());
        print!("{}", figure_report(fig, &exp));
    }
    Ok(())
}
