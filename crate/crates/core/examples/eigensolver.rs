//! The complex Jacobi eigensolver on a random Hermitian matrix and on the
//! dephased qubit state.
//!
//! cargo run --example eigensolver

use qfirstlaw::{hermitian_eigen, Complex64, ComplexMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = |re, im| Complex64::new(re, im);
    let a = ComplexMatrix::from_rows(&[
        [c(2.0, 0.0), c(0.5, -0.3), c(0.0, 1.0)],
        [c(0.5, 0.3), c(-1.0, 0.0), c(0.2, 0.0)],
        [c(0.0, -1.0), c(0.2, 0.0), c(0.5, 0.0)],
    ]);
    let e = hermitian_eigen(&a, 1e-12)?;
    println!("eigenvalues: {:?}", e.eigenvalues);
    for j in 0..e.dim() {
        let v: Vec<String> = e.vector(j).iter().map(|z| format!("{:+.4}{:+.4}i", z.re, z.im)).collect();
        println!("  v{j} = [{}]", v.join(", "));
    }
    println!("residual {:.1e}", e.max_residual(&a)?);
    println!("orthonormality {:.1e}", e.orthonormality_deviation());
    println!("reconstruction {:.1e}", e.reconstruction_error(&a)?);

    // ρ(τ) for θ = π/6 after phase damping to τ = 1
    let off = 3f64.sqrt() / 4.0 * (-0.5f64).exp();
    let rho = ComplexMatrix::from_real_rows(&[[0.75, off], [off, 0.25]]);
    let e = hermitian_eigen(&rho, 1e-12)?;
    let root = (0.25 + 0.75 * (-1f64).exp()).sqrt();
    println!("rho(1) eigenvalues {:?}, closed form [{}, {}]", e.eigenvalues, 0.5 * (1.0 - root), 0.5 * (1.0 + root));
    Ok(())
}
