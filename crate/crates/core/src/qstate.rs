//! States, Hamiltonians and the internal energy U = Tr(ρH).

use num_complex::Complex64;
use thiserror::Error;

use crate::cxmat::{hermitian_eigen, ComplexMatrix, HermitianEigenDecomposition, MatrixError};
use crate::exprparse::{self, ExprError, Expression};
use crate::validation::ValidationReport;

pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-12;
/// Pure states carry an exactly-zero eigenvalue, so round-off below zero is admitted.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Largest imaginary part of Tr(ρH) accepted before it is discarded.
pub const IMAGINARY_ENERGY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("Hamiltonian entry {entry}: {source}")]
    Expression {
        entry: String,
        #[source]
        source: ExprError,
    },
    #[error("dimension mismatch: state is {state}x{state}, Hamiltonian is {hamiltonian}x{hamiltonian}")]
    DimensionMismatch { state: usize, hamiltonian: usize },
    #[error("Tr(rho H) has imaginary part {0:e}")]
    ImaginaryEnergy(f64),
    #[error("invalid density operator:\n{0}")]
    InvalidDensity(ValidationReport),
    #[error("Hamiltonian entry ({row}, {col}) is outside a {dim}x{dim} matrix or below the diagonal")]
    BadEntry { row: usize, col: usize, dim: usize },
}

pub type Result<T> = std::result::Result<T, StateError>;

/// |ψ⟩ = cos θ |g⟩ + e^{iφ} sin θ |e⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialStatePrep {
    pub theta: f64,
    pub phi: f64,
}

impl InitialStatePrep {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.theta.cos(), 0.0),
            Complex64::from_polar(self.theta.sin(), self.phi),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Wraps a square matrix without checking the density invariants; use
    /// [`validate_density`] or [`DensityOperator::new`] for that.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        matrix.require_square("density operator")?;
        Ok(Self { matrix })
    }

    /// Checked constructor: Hermitian and unit trace within 1e-12, PSD within −1e-10.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::from_matrix(matrix)?;
        let report = rho.invariant_report(HERMITIAN_TOLERANCE, TRACE_TOLERANCE, PSD_TOLERANCE);
        if report.passed() {
            Ok(rho)
        } else {
            Err(StateError::InvalidDensity(report))
        }
    }

    /// |ψ⟩⟨ψ| for a normalized state vector.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let n = psi.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        Self::new(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Unitary change of frame, U ρ U†.
    pub fn conjugated_by(&self, u: &ComplexMatrix) -> Result<Self> {
        let m = u.mul(&self.matrix)?.mul(&u.adjoint())?.hermitian_part()?;
        Ok(Self { matrix: m })
    }

    fn invariant_report(&self, herm_tol: f64, trace_tol: f64, psd_tol: f64) -> ValidationReport {
        let mut report = ValidationReport::new();
        let herm = self.matrix.hermitian_deviation().unwrap_or(f64::INFINITY);
        report.push("hermitian", herm, herm_tol);
        let tr = self.matrix.trace().map(|z| (z - 1.0).norm()).unwrap_or(f64::INFINITY);
        report.push("trace", tr, trace_tol);
        // PSD is judged on the Hermitian part so a non-Hermitian input still gets a number
        let min_eig = self
            .matrix
            .hermitian_part()
            .ok()
            .and_then(|h| hermitian_eigen(&h, f64::INFINITY).ok())
            .and_then(|e| e.eigenvalues.first().copied())
            .unwrap_or(f64::NEG_INFINITY);
        report.push("psd", (-min_eig).max(0.0), psd_tol);
        report
    }
}

pub fn prepare_pure_state(prep: InitialStatePrep) -> DensityOperator {
    let psi = prep.amplitudes();
    DensityOperator::from_pure(&psi).expect("normalized by construction")
}

/// Checks Hermiticity, unit trace and positivity, each against `tol`.
pub fn validate_density(rho: &DensityOperator, tol: f64) -> ValidationReport {
    rho.invariant_report(tol, tol, tol)
}

#[derive(Debug, Clone, PartialEq)]
struct OffDiagonal {
    row: usize,
    col: usize,
    re: Expression,
    im: Expression,
}

/// Hermitian matrix of time-dependent entries. Only the diagonal and the upper
/// triangle are stored; entry (j, i) is the conjugate of (i, j).
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    diagonal: Vec<Expression>,
    upper: Vec<OffDiagonal>,
}

impl Hamiltonian {
    /// E_g |g⟩⟨g| + E_e |e⟩⟨e|.
    pub fn two_level(e_g: f64, e_e: f64) -> Self {
        Self::constant_diagonal(&[e_g, e_e])
    }

    pub fn constant_diagonal(energies: &[f64]) -> Self {
        assert!(!energies.is_empty());
        Self {
            diagonal: energies.iter().map(|&e| Expression::Number(e)).collect(),
            upper: Vec::new(),
        }
    }

    pub fn diagonal_exprs(diagonal: Vec<Expression>) -> Self {
        assert!(!diagonal.is_empty());
        Self {
            diagonal,
            upper: Vec::new(),
        }
    }

    /// Parses each diagonal entry from the expression language.
    pub fn parse_diagonal<S: AsRef<str>>(entries: &[S]) -> Result<Self> {
        let diagonal = entries
            .iter()
            .enumerate()
            .map(|(i, s)| {
                exprparse::parse_str(s.as_ref()).map_err(|source| StateError::Expression {
                    entry: format!("({i}, {i})"),
                    source,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::diagonal_exprs(diagonal))
    }

    /// A time-independent Hamiltonian from a Hermitian matrix.
    pub fn constant(matrix: &ComplexMatrix) -> Result<Self> {
        let deviation = matrix.hermitian_deviation()?;
        if deviation > HERMITIAN_TOLERANCE {
            return Err(MatrixError::NotHermitian {
                deviation,
                tol: HERMITIAN_TOLERANCE,
            }
            .into());
        }
        let n = matrix.rows();
        let mut h = Self::constant_diagonal(&(0..n).map(|i| matrix[(i, i)].re).collect::<Vec<_>>());
        for i in 0..n {
            for j in (i + 1)..n {
                let z = matrix[(i, j)];
                if z != Complex64::new(0.0, 0.0) {
                    h = h.with_off_diagonal(i, j, Expression::Number(z.re), Expression::Number(z.im))?;
                }
            }
        }
        Ok(h)
    }

    /// Sets entry (row, col), row < col, to re + i·im; (col, row) follows as the conjugate.
    pub fn with_off_diagonal(mut self, row: usize, col: usize, re: Expression, im: Expression) -> Result<Self> {
        let dim = self.dim();
        if row >= col || col >= dim {
            return Err(StateError::BadEntry { row, col, dim });
        }
        self.upper.retain(|o| (o.row, o.col) != (row, col));
        self.upper.push(OffDiagonal { row, col, re, im });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// No entry depends on `t`.
    pub fn is_static(&self) -> bool {
        !self.diagonal.iter().any(Expression::depends_on_time)
            && !self
                .upper
                .iter()
                .any(|o| o.re.depends_on_time() || o.im.depends_on_time())
    }

    pub fn at(&self, t: f64) -> Result<ComplexMatrix> {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, e) in self.diagonal.iter().enumerate() {
            let v = e.eval(t).map_err(|source| StateError::Expression {
                entry: format!("({i}, {i})"),
                source,
            })?;
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        for o in &self.upper {
            let wrap = |source| StateError::Expression {
                entry: format!("({}, {})", o.row, o.col),
                source,
            };
            let z = Complex64::new(o.re.eval(t).map_err(wrap)?, o.im.eval(t).map_err(wrap)?);
            m[(o.row, o.col)] = z;
            m[(o.col, o.row)] = z.conj();
        }
        Ok(m)
    }
}

/// Energies E_n and basis columns |n⟩ of H at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEigenbasis {
    pub energies: Vec<f64>,
    pub basis_vectors: ComplexMatrix,
}

impl EnergyEigenbasis {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }
}

impl From<HermitianEigenDecomposition> for EnergyEigenbasis {
    fn from(e: HermitianEigenDecomposition) -> Self {
        Self {
            energies: e.eigenvalues,
            basis_vectors: e.eigenvectors,
        }
    }
}

impl From<EnergyEigenbasis> for HermitianEigenDecomposition {
    fn from(e: EnergyEigenbasis) -> Self {
        Self {
            eigenvalues: e.energies,
            eigenvectors: e.basis_vectors,
        }
    }
}

/// U = Tr(ρ H(t)), with the imaginary round-off checked and dropped.
pub fn internal_energy(rho: &DensityOperator, h: &Hamiltonian, t: f64) -> Result<f64> {
    energy_with_matrix(rho, &h.at(t)?)
}

pub(crate) fn energy_with_matrix(rho: &DensityOperator, h: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != h.rows() {
        return Err(StateError::DimensionMismatch {
            state: rho.dim(),
            hamiltonian: h.rows(),
        });
    }
    let u = rho.matrix().mul(h)?.trace()?;
    if u.im.abs() > IMAGINARY_ENERGY_TOLERANCE {
        return Err(StateError::ImaginaryEnergy(u.im));
    }
    Ok(u.re)
}

/// Diagonal H(t) is returned in the computational basis untouched (energies in
/// index order); anything else goes through the Jacobi solver.
pub fn energy_eigenbasis(h: &Hamiltonian, t: f64) -> Result<EnergyEigenbasis> {
    let m = h.at(t)?;
    if m.is_diagonal() {
        let n = m.rows();
        return Ok(EnergyEigenbasis {
            energies: (0..n).map(|i| m[(i, i)].re).collect(),
            basis_vectors: ComplexMatrix::identity(n),
        });
    }
    Ok(hermitian_eigen(&m, HERMITIAN_TOLERANCE)?.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.sub(b).unwrap().max_abs() <= tol
    }

    #[test]
    fn pure_state_examples() {
        let g = prepare_pure_state(InitialStatePrep::new(0.0, 0.0));
        assert_eq!(g.matrix(), &ComplexMatrix::real_diagonal(&[1.0, 0.0]));

        let s3 = 3f64.sqrt() / 4.0;
        let rho = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0));
        let expected = ComplexMatrix::from_real_rows(&[[0.75, s3], [s3, 0.25]]);
        assert!(close(rho.matrix(), &expected, 1e-15));

        let rho = prepare_pure_state(InitialStatePrep::new(FRAC_PI_4, PI));
        let expected = ComplexMatrix::from_real_rows(&[[0.5, -0.5], [-0.5, 0.5]]);
        assert!(close(rho.matrix(), &expected, 1e-15));
    }

    #[test]
    fn pure_states_are_idempotent() {
        for i in 0..20 {
            for j in 0..8 {
                let prep = InitialStatePrep::new(i as f64 * FRAC_PI_4 / 10.0, j as f64 * PI / 4.0);
                let rho = prepare_pure_state(prep);
                assert!(validate_density(&rho, 1e-12).passed());
                let sq = rho.matrix().mul(rho.matrix()).unwrap();
                assert!(close(&sq, rho.matrix(), 1e-12));
            }
        }
    }

    #[test]
    fn validate_density_examples() {
        let rho = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0));
        assert!(validate_density(&rho, 1e-12).passed());

        let bad = DensityOperator::from_matrix(ComplexMatrix::from_real_rows(&[[0.6, 0.6], [0.6, 0.4]])).unwrap();
        let report = validate_density(&bad, 1e-12);
        assert!(!report.passed());
        let psd = report.check("psd").unwrap();
        assert!(!psd.passed);
        // ½(√1.48 − 1)
        assert!((psd.deviation - 0.108_276_253_029_821_97).abs() < 1e-12);
        assert!(report.check("trace").unwrap().passed);

        let short = DensityOperator::from_matrix(ComplexMatrix::real_diagonal(&[0.5, 0.4])).unwrap();
        let report = validate_density(&short, 1e-12);
        assert!(!report.check("trace").unwrap().passed);
        assert!(DensityOperator::new(ComplexMatrix::real_diagonal(&[0.5, 0.4])).is_err());
    }

    #[test]
    fn energy_examples() {
        let rho = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0));
        let u = internal_energy(&rho, &Hamiltonian::two_level(0.0, 1.0), 0.0).unwrap();
        assert!((u - 0.25).abs() < 1e-15);

        let g = DensityOperator::new(ComplexMatrix::real_diagonal(&[1.0, 0.0])).unwrap();
        assert_eq!(internal_energy(&g, &Hamiltonian::two_level(-0.3, 2.0), 0.0).unwrap(), -0.3);

        let three = Hamiltonian::constant_diagonal(&[0.0, 1.0, 2.0]);
        assert!(matches!(
            internal_energy(&g, &three, 0.0),
            Err(StateError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn energy_is_linear_and_shift_covariant() {
        let rho = prepare_pure_state(InitialStatePrep::new(0.4, 1.1));
        let h1 = ComplexMatrix::from_rows(&[
            [Complex64::new(0.2, 0.0), Complex64::new(0.3, -0.1)],
            [Complex64::new(0.3, 0.1), Complex64::new(-1.0, 0.0)],
        ]);
        let h2 = ComplexMatrix::pauli_y();
        let u1 = internal_energy(&rho, &Hamiltonian::constant(&h1).unwrap(), 0.0).unwrap();
        let u2 = internal_energy(&rho, &Hamiltonian::constant(&h2).unwrap(), 0.0).unwrap();
        let sum = h1.scale(Complex64::new(2.0, 0.0)).add(&h2).unwrap();
        let u = internal_energy(&rho, &Hamiltonian::constant(&sum).unwrap(), 0.0).unwrap();
        assert!((u - (2.0 * u1 + u2)).abs() < 1e-14);

        let shifted = h1.add(&ComplexMatrix::identity(2).scale(Complex64::new(5.0, 0.0))).unwrap();
        let us = internal_energy(&rho, &Hamiltonian::constant(&shifted).unwrap(), 0.0).unwrap();
        assert!((us - (u1 + 5.0)).abs() < 1e-14);
    }

    #[test]
    fn eigenbasis_examples() {
        let eb = energy_eigenbasis(&Hamiltonian::two_level(0.0, 1.0), 0.0).unwrap();
        assert_eq!(eb.energies, vec![0.0, 1.0]);
        assert_eq!(eb.basis_vectors, ComplexMatrix::identity(2));

        let eb = energy_eigenbasis(&Hamiltonian::constant(&ComplexMatrix::pauli_x()).unwrap(), 0.0).unwrap();
        assert!((eb.energies[0] + 1.0).abs() < 1e-15 && (eb.energies[1] - 1.0).abs() < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expected = ComplexMatrix::from_real_rows(&[[r, r], [-r, r]]);
        assert!(close(&eb.basis_vectors, &expected, 1e-15));
    }

    #[test]
    fn driven_hamiltonian() {
        let h = Hamiltonian::parse_diagonal(&["0", "1+0.1*t"]).unwrap();
        assert!(!h.is_static());
        assert!(Hamiltonian::two_level(0.0, 1.0).is_static());
        let eb = energy_eigenbasis(&h, 2.0).unwrap();
        assert_eq!(eb.energies, vec![0.0, 1.2]);
        assert_eq!(eb.basis_vectors, ComplexMatrix::identity(2));
        assert!(Hamiltonian::parse_diagonal(&["sqrt(t-1)"]).unwrap().at(0.0).is_err());
    }

    #[test]
    fn off_diagonal_entries_are_hermitian() {
        let h = Hamiltonian::two_level(0.0, 1.0)
            .with_off_diagonal(0, 1, "0.5*t".parse().unwrap(), "0.25".parse().unwrap())
            .unwrap();
        let m = h.at(2.0).unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(1.0, 0.25));
        assert_eq!(m[(1, 0)], Complex64::new(1.0, -0.25));
        assert!(h.clone().with_off_diagonal(1, 0, 0.0.into(), 0.0.into()).is_err());
    }
}
