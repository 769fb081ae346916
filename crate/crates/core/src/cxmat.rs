//! Dense complex matrices and a cyclic Jacobi eigensolver for Hermitian input.
//!
//! Everything here is small-dimension, row-major and allocation-light; the
//! largest matrices this crate handles are single-digit square.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

/// Matrix entries are plain `num_complex` doubles.
pub type ComplexScalar = Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Jacobi stops once every off-diagonal magnitude is below this fraction of
/// the largest input entry.
pub const JACOBI_RELATIVE_THRESHOLD: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("matrix dimensions must be positive")]
    Empty,
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not Hermitian: max |A - A^H| = {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("Jacobi iteration did not converge in {sweeps} sweeps (off-diagonal {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
}

pub type Result<T> = std::result::Result<T, MatrixError>;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting NaN and infinities.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        if data.len() != rows * cols {
            return Err(MatrixError::Shape {
                op: "from_vec",
                lhs: (rows, cols),
                rhs: (data.len(), 1),
            });
        }
        if let Some(idx) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatrixError::NonFinite {
                row: idx / cols,
                col: idx % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Convenience constructor for literal matrices in code and tests.
    ///
    /// Panics on ragged rows or non-finite entries.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self::from_vec(rows.len(), cols, data).expect("invalid literal matrix")
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let converted: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&converted)
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn real_diagonal(values: &[f64]) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&v)
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn pauli_y() -> Self {
        Self::from_rows(&[
            [ZERO, Complex64::new(0.0, -1.0)],
            [Complex64::new(0.0, 1.0), ZERO],
        ])
    }

    pub fn pauli_z() -> Self {
        Self::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[Complex64]) {
        assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(MatrixError::Shape {
                op: "mul",
                lhs: (self.rows, self.cols),
                rhs: (rhs.rows, rhs.cols),
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Result<Complex64> {
        self.require_square("trace")?;
        Ok((0..self.rows).map(|i| self[(i, i)]).sum())
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    /// Largest entry modulus, ‖A‖_max.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ‖A − A†‖_max; zero for exactly Hermitian input.
    pub fn hermitian_deviation(&self) -> Result<f64> {
        self.require_square("hermitian_deviation")?;
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        Ok(dev)
    }

    /// Returns ½(A + A†), which is exactly Hermitian.
    pub fn hermitian_part(&self) -> Result<ComplexMatrix> {
        self.require_square("hermitian_part")?;
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] = Complex64::new(self[(i, i)].re, 0.0);
            for j in (i + 1)..self.cols {
                let avg = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        Ok(out)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)] == ZERO))
    }

    /// A · v for a column vector given as a slice.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(MatrixError::Shape {
                op: "apply",
                lhs: (self.rows, self.cols),
                rhs: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|k| self[(i, k)] * v[k]).sum())
            .collect())
    }

    pub fn require_square(&self, op: &'static str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(MatrixError::NotSquare {
                op,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn zip_with(
        &self,
        rhs: &ComplexMatrix,
        op: &'static str,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<ComplexMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(MatrixError::Shape {
                op,
                lhs: (self.rows, self.cols),
                rhs: (rhs.rows, rhs.cols),
            });
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// ⟨u|v⟩ = Σ conj(u_i) v_i.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Eigenvalues ascending; column `j` of `eigenvectors` pairs with `eigenvalues[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, j: usize) -> Vec<Complex64> {
        self.eigenvectors.column(j)
    }

    /// Reorders eigenpairs so that new position `k` holds old pair `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> HermitianEigenDecomposition {
        assert_eq!(perm.len(), self.dim());
        let mut vectors = self.eigenvectors.clone();
        for (k, &src) in perm.iter().enumerate() {
            vectors.set_column(k, &self.eigenvectors.column(src));
        }
        HermitianEigenDecomposition {
            eigenvalues: perm.iter().map(|&src| self.eigenvalues[src]).collect(),
            eigenvectors: vectors,
        }
    }

    /// Largest ‖A v_j − λ_j v_j‖ over all columns.
    pub fn max_residual(&self, a: &ComplexMatrix) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for j in 0..self.dim() {
            let v = self.vector(j);
            let av = a.apply(&v)?;
            let r = av
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - y * self.eigenvalues[j]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        Ok(worst)
    }

    /// ‖V†V − I‖_max.
    pub fn orthonormality_deviation(&self) -> f64 {
        let v = &self.eigenvectors;
        let gram = v.adjoint().mul(v).expect("square eigenvector matrix");
        gram.sub(&ComplexMatrix::identity(self.dim()))
            .expect("same shape")
            .max_abs()
    }

    /// ‖A − VΛV†‖_max.
    pub fn reconstruction_error(&self, a: &ComplexMatrix) -> Result<f64> {
        let lambda = ComplexMatrix::real_diagonal(&self.eigenvalues);
        let rebuilt = self.eigenvectors.mul(&lambda)?.mul(&self.eigenvectors.adjoint())?;
        Ok(a.sub(&rebuilt)?.max_abs())
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// `tol` bounds the accepted ‖A − A†‖_max of the input. Each eigenvector is
/// phase-fixed so that its largest-modulus component is real and positive.
pub fn hermitian_eigen(a: &ComplexMatrix, tol: f64) -> Result<HermitianEigenDecomposition> {
    a.require_square("hermitian_eigen")?;
    let deviation = a.hermitian_deviation()?;
    if deviation > tol {
        return Err(MatrixError::NotHermitian { deviation, tol });
    }
    let n = a.rows();
    let mut work = a.hermitian_part()?;
    let mut vectors = ComplexMatrix::identity(n);
    let threshold = JACOBI_RELATIVE_THRESHOLD * a.max_abs();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_max(&work) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if work[(p, q)].norm() > threshold {
                    rotate(&mut work, &mut vectors, p, q);
                }
            }
        }
    }
    if !converged {
        let off = off_diagonal_max(&work);
        if off > threshold {
            return Err(MatrixError::NoConvergence {
                sweeps: JACOBI_MAX_SWEEPS,
                off_diagonal: off,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| work[(i, i)].re.total_cmp(&work[(j, j)].re));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| work[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src);
        fix_phase(&mut col);
        eigenvectors.set_column(k, &col);
    }
    Ok(HermitianEigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_max(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m = m.max(a[(i, j)].norm());
            }
        }
    }
    m
}

/// One two-sided rotation zeroing work[(p, q)].
///
/// The (p, q) block is first made real by the phase e^{-iφ} on column q, then
/// annihilated by a real Givens rotation. The combined 2×2 unitary is
/// U = [[c, s], [−s·e^{−iφ}, c·e^{−iφ}]] acting on columns p and q.
fn rotate(work: &mut ComplexMatrix, vectors: &mut ComplexMatrix, p: usize, q: usize) {
    let n = work.rows();
    let b = work[(p, q)];
    let b_abs = b.norm();
    let phase = b / b_abs; // e^{iφ}
    let app = work[(p, p)].re;
    let aqq = work[(q, q)].re;

    let theta = (aqq - app) / (2.0 * b_abs);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let conj_phase = phase.conj();
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = conj_phase * (-s);
    let u_qq = conj_phase * c;

    // A <- A U (columns p, q)
    for i in 0..n {
        let aip = work[(i, p)];
        let aiq = work[(i, q)];
        work[(i, p)] = aip * u_pp + aiq * u_qp;
        work[(i, q)] = aip * u_pq + aiq * u_qq;
    }
    // A <- U† A (rows p, q)
    for j in 0..n {
        let apj = work[(p, j)];
        let aqj = work[(q, j)];
        work[(p, j)] = u_pp.conj() * apj + u_qp.conj() * aqj;
        work[(q, j)] = u_pq.conj() * apj + u_qq.conj() * aqj;
    }
    work[(p, q)] = ZERO;
    work[(q, p)] = ZERO;
    work[(p, p)] = Complex64::new(work[(p, p)].re, 0.0);
    work[(q, q)] = Complex64::new(work[(q, q)].re, 0.0);

    for i in 0..n {
        let vip = vectors[(i, p)];
        let viq = vectors[(i, q)];
        vectors[(i, p)] = vip * u_pp + viq * u_qp;
        vectors[(i, q)] = vip * u_pq + viq * u_qq;
    }
}

/// Rotates `v` so its largest-modulus component is real and positive.
///
/// Near-ties (within 1e-12) resolve to the lowest index so that symmetric
/// vectors such as (1, −1)/√2 get a stable representative.
fn fix_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max - 1e-12)
        .expect("max exists");
    let rot = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[pivot] = Complex64::new(v[pivot].norm(), 0.0);
}
