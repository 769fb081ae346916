//! The expression language used in custom channels and driven Hamiltonians.
//!
//! cargo run --example expressions

use qfirstlaw::exprparse::{parse_str, tokenize};

fn main() {
    for src in ["1-exp(-t)", "sqrt(1-0.5^2)", "2^3^2", "-2^2", "(1+2)*3", "sin(t)^2+cos(t)^2"] {
        let expr = parse_str(src).expect("valid");
        let tokens = tokenize(src).expect("valid").len();
        let values: Vec<String> = [0.0, std::f64::consts::LN_2, 1.0]
            .iter()
            .map(|&t| format!("{:.6}", expr.eval(t).unwrap()))
            .collect();
        println!("{src:<20} {tokens:>2} tokens  tree {expr:<34} at t=0, ln2, 1: {}", values.join(", "));
    }
    for src in ["2$t", "foo(t)", "(1+t", "sqrt(-1-t)", "log(t)"] {
        match parse_str(src).and_then(|e| e.eval(0.0)) {
            Ok(v) => println!("{src:<20} = {v}"),
            Err(e) => println!("{src:<20} error: {e}"),
        }
    }
}
