//! Runs the whole check suite in-process and prints the failures, if any.
//!
//! cargo run --example verify_suite

use qfirstlaw::verify::{run_all, VerifyOptions};

fn main() {
    let results = run_all(&VerifyOptions::default());
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    println!("{} checks, {} failed", results.len(), failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
