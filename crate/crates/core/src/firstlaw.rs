//! Spectral trajectories of ρ(τ) and quadrature of the first-law fluxes.
//!
//! With H = Σ E_n |n⟩⟨n|, ρ = Σ ρ_k |k⟩⟨k| and O[n][k] = |⟨n|k⟩|², the
//! internal energy is U = Σ E_n ρ_k O[n][k] and its change splits into
//!
//! ```text
//! dW = Σ ρ_k O[n][k] dE_n      dQ = Σ E_n O[n][k] dρ_k      dC = Σ E_n ρ_k dO[n][k]
//! ```
//!
//! Each interval of the grid uses endpoint averages for the undifferentiated
//! factors and endpoint differences for the differentiated one, which is a
//! second-order rule. ΔU is never integrated: it comes from Tr(ρH) directly,
//! so |ΔU − (W + Q + C)| is the discretization error of the ledger.

use itertools::Itertools;
use num_complex::Complex64;
use thiserror::Error;

use crate::channel::{self, ChannelError, ChannelSpec};
use crate::cxmat::{hermitian_eigen, inner, ComplexMatrix, HermitianEigenDecomposition, MatrixError};
use crate::qstate::{self, energy_eigenbasis, DensityOperator, EnergyEigenbasis, Hamiltonian, StateError};

/// Exhaustive branch matching is limited to 8! permutations.
pub const MAX_MATCH_DIM: usize = 8;
/// Eigenvalues closer than this are treated as one degenerate eigenspace.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;
/// Permutation scores within this are ties.
const SCORE_TIE: f64 = 1e-12;
const EIGEN_HERMITIAN_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_TAU_MAX: f64 = 8.0;
pub const DEFAULT_STEPS: usize = 4000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FirstLawError {
    #[error("grid needs tau_max > 0 and steps >= 1 (got tau_max={tau_max}, steps={steps})")]
    BadGrid { tau_max: f64, steps: usize },
    #[error("branch matching supports dimension <= {MAX_MATCH_DIM}, got {0}")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: channel {channel}, state {state}, Hamiltonian {hamiltonian}")]
    DimensionMismatch {
        channel: usize,
        state: usize,
        hamiltonian: usize,
    },
    #[error("at tau={tau}: {source}")]
    Channel {
        tau: f64,
        #[source]
        source: ChannelError,
    },
    #[error("at tau={tau}: {source}")]
    Eigen {
        tau: f64,
        #[source]
        source: MatrixError,
    },
    #[error("at tau={tau}: {source}")]
    State {
        tau: f64,
        #[source]
        source: StateError,
    },
    #[error("ledger needs a trajectory with at least one snapshot")]
    EmptyTrajectory,
}

impl FirstLawError {
    /// The dimensionless time the failure happened at, when there is one.
    pub fn tau(&self) -> Option<f64> {
        match self {
            FirstLawError::Channel { tau, .. }
            | FirstLawError::Eigen { tau, .. }
            | FirstLawError::State { tau, .. } => Some(*tau),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, FirstLawError>;

/// Uniform grid τ_i = i·tau_max/steps, i = 0..=steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    tau_max: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(tau_max: f64, steps: usize) -> Result<Self> {
        if !(tau_max.is_finite() && tau_max > 0.0) || steps == 0 {
            return Err(FirstLawError::BadGrid { tau_max, steps });
        }
        Ok(Self { tau_max, steps })
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&self) -> f64 {
        self.tau_max / self.steps as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i == self.steps {
            self.tau_max
        } else {
            i as f64 * self.tau_max / self.steps as f64
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|i| self.point(i))
    }

    /// Index of the grid point closest to `tau`.
    pub fn nearest(&self, tau: f64) -> usize {
        ((tau / self.step()).round().max(0.0) as usize).min(self.steps)
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            tau_max: DEFAULT_TAU_MAX,
            steps: DEFAULT_STEPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSnapshot {
    pub tau: f64,
    pub state: DensityOperator,
    /// ρ_k in branch order (not sorted).
    pub eigenvalues: Vec<f64>,
    /// |k⟩ as columns, same order as `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
    pub energies: Vec<f64>,
    pub energy_basis: ComplexMatrix,
    /// overlap[n][k] = |⟨n|k⟩|².
    pub overlap: Vec<Vec<f64>>,
}

impl SpectralSnapshot {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest deviation of any row or column sum of the overlap from 1.
    pub fn stochasticity_deviation(&self) -> f64 {
        let d = self.dim();
        let rows = self.overlap.iter().map(|r| (r.iter().sum::<f64>() - 1.0).abs());
        let cols = (0..d).map(|k| (self.overlap.iter().map(|r| r[k]).sum::<f64>() - 1.0).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }

    /// Σ_n Σ_k E_n ρ_k O[n][k].
    pub fn spectral_energy(&self) -> f64 {
        let mut u = 0.0;
        for (n, row) in self.overlap.iter().enumerate() {
            for (k, o) in row.iter().enumerate() {
                u += self.energies[n] * self.eigenvalues[k] * o;
            }
        }
        u
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTrajectory {
    pub grid: TimeGrid,
    /// Γ of the channel; physical time is τ/Γ.
    pub rate: f64,
    pub snapshots: Vec<SpectralSnapshot>,
}

/// Picks the ordering of `cur` that best continues `prev`.
///
/// Returns `perm` with new branch `k` taken from `cur` column `perm[k]`,
/// maximizing Σ_k |⟨prev_k|cur_perm[k]⟩|² over all permutations. Near-ties
/// go to the smallest Σ_k |Δρ_k|, then to the first permutation in
/// lexicographic order.
pub fn branch_match(prev: &HermitianEigenDecomposition, cur: &HermitianEigenDecomposition) -> Result<Vec<usize>> {
    let d = cur.dim();
    if d > MAX_MATCH_DIM {
        return Err(FirstLawError::UnsupportedDimension(d));
    }
    assert_eq!(prev.dim(), d, "branch_match on mismatched dimensions");
    let prev_vecs: Vec<_> = (0..d).map(|k| prev.vector(k)).collect();
    let cur_vecs: Vec<_> = (0..d).map(|k| cur.vector(k)).collect();
    let fidelity: Vec<Vec<f64>> = prev_vecs
        .iter()
        .map(|p| cur_vecs.iter().map(|c| inner(p, c).norm_sqr()).collect())
        .collect();

    let mut best: Option<(Vec<usize>, f64, f64)> = None;
    for perm in (0..d).permutations(d) {
        let score: f64 = perm.iter().enumerate().map(|(k, &l)| fidelity[k][l]).sum();
        let drift: f64 = perm
            .iter()
            .enumerate()
            .map(|(k, &l)| (prev.eigenvalues[k] - cur.eigenvalues[l]).abs())
            .sum();
        let better = match &best {
            None => true,
            Some((_, s, dr)) => score > s + SCORE_TIE || ((score - s).abs() <= SCORE_TIE && drift < *dr),
        };
        if better {
            best = Some((perm, score, drift));
        }
    }
    Ok(best.map(|(p, _, _)| p).unwrap_or_default())
}

/// Replaces eigenvectors inside degenerate clusters of `cur` by the previous
/// snapshot's, when those are still eigenvectors of `rho`.
fn inherit_degenerate(
    prev: &HermitianEigenDecomposition,
    cur: &mut HermitianEigenDecomposition,
    rho: &ComplexMatrix,
) -> std::result::Result<(), MatrixError> {
    let d = cur.dim();
    let degenerate: Vec<usize> = (0..d)
        .filter(|&k| (0..d).any(|l| l != k && (cur.eigenvalues[k] - cur.eigenvalues[l]).abs() <= DEGENERACY_TOLERANCE))
        .collect();
    if degenerate.is_empty() {
        return Ok(());
    }
    for &k in &degenerate {
        let v = prev.vector(k);
        let rv = rho.apply(&v)?;
        let residual = rv
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - y * cur.eigenvalues[k]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > 1e-10 {
            return Ok(());
        }
    }
    for &k in &degenerate {
        cur.eigenvectors.set_column(k, &prev.vector(k));
    }
    Ok(())
}

fn overlap_matrix(energy_basis: &ComplexMatrix, eigenvectors: &ComplexMatrix) -> Vec<Vec<f64>> {
    let d = energy_basis.cols();
    let ns: Vec<Vec<Complex64>> = (0..d).map(|n| energy_basis.column(n)).collect();
    let ks: Vec<Vec<Complex64>> = (0..d).map(|k| eigenvectors.column(k)).collect();
    ns.iter()
        .map(|n| ks.iter().map(|k| inner(n, k).norm_sqr()).collect())
        .collect()
}

/// Evolves, diagonalizes and branch-matches ρ(τ) at every grid point.
///
/// The energy eigenbasis is branch-matched the same way when H depends on
/// time; a static H is diagonalized once.
pub fn spectral_trajectory(
    spec: &ChannelSpec,
    rho0: &DensityOperator,
    h: &Hamiltonian,
    grid: &TimeGrid,
) -> Result<SpectralTrajectory> {
    let d = rho0.dim();
    if spec.dim() != d || h.dim() != d {
        return Err(FirstLawError::DimensionMismatch {
            channel: spec.dim(),
            state: d,
            hamiltonian: h.dim(),
        });
    }
    if d > MAX_MATCH_DIM {
        return Err(FirstLawError::UnsupportedDimension(d));
    }

    let static_basis = if h.is_static() {
        Some(energy_eigenbasis(h, 0.0).map_err(|source| FirstLawError::State { tau: 0.0, source })?)
    } else {
        None
    };

    let mut snapshots: Vec<SpectralSnapshot> = Vec::with_capacity(grid.steps() + 1);
    let mut prev_state: Option<HermitianEigenDecomposition> = None;
    let mut prev_energy: Option<HermitianEigenDecomposition> = None;

    for tau in grid.points() {
        let t = tau / spec.rate;
        let state = channel::evolve(spec, rho0, t).map_err(|source| FirstLawError::Channel { tau, source })?;
        let mut eig = hermitian_eigen(state.matrix(), EIGEN_HERMITIAN_TOLERANCE)
            .map_err(|source| FirstLawError::Eigen { tau, source })?;
        if let Some(prev) = &prev_state {
            eig = eig.permuted(&branch_match(prev, &eig)?);
            inherit_degenerate(prev, &mut eig, state.matrix()).map_err(|source| FirstLawError::Eigen { tau, source })?;
        }

        let energy: EnergyEigenbasis = match &static_basis {
            Some(b) => b.clone(),
            None => {
                let basis = energy_eigenbasis(h, t).map_err(|source| FirstLawError::State { tau, source })?;
                let mut dec: HermitianEigenDecomposition = basis.into();
                if let Some(prev) = &prev_energy {
                    dec = dec.permuted(&branch_match(prev, &dec)?);
                    let hm = h.at(t).map_err(|source| FirstLawError::State { tau, source })?;
                    inherit_degenerate(prev, &mut dec, &hm).map_err(|source| FirstLawError::Eigen { tau, source })?;
                }
                prev_energy = Some(dec.clone());
                dec.into()
            }
        };

        let overlap = overlap_matrix(&energy.basis_vectors, &eig.eigenvectors);
        snapshots.push(SpectralSnapshot {
            tau,
            state,
            eigenvalues: eig.eigenvalues.clone(),
            eigenvectors: eig.eigenvectors.clone(),
            energies: energy.energies,
            energy_basis: energy.basis_vectors,
            overlap,
        });
        prev_state = Some(eig);
    }

    Ok(SpectralTrajectory {
        grid: *grid,
        rate: spec.rate,
        snapshots,
    })
}

/// Cumulative energetics at one grid point, all measured from τ = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub tau: f64,
    pub delta_u: f64,
    pub work: f64,
    pub heat: f64,
    pub coherence: f64,
}

impl LedgerRow {
    /// ΔU − (W + Q + C).
    pub fn closure_residual(&self) -> f64 {
        self.delta_u - (self.work + self.heat + self.coherence)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergeticsLedger {
    pub rows: Vec<LedgerRow>,
}

impl EnergeticsLedger {
    pub fn last(&self) -> &LedgerRow {
        self.rows.last().expect("ledger is never empty")
    }

    pub fn max_closure_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.closure_residual().abs()).fold(0.0, f64::max)
    }

    /// Largest |f(row)| over the ledger.
    pub fn max_abs(&self, f: impl Fn(&LedgerRow) -> f64) -> f64 {
        self.rows.iter().map(|r| f(r).abs()).fold(0.0, f64::max)
    }
}

/// Integrates W, Q and C along a trajectory and records the exact ΔU.
pub fn integrate_first_law(traj: &SpectralTrajectory, h: &Hamiltonian) -> Result<EnergeticsLedger> {
    let first = traj.snapshots.first().ok_or(FirstLawError::EmptyTrajectory)?;
    let energy_at = |snap: &SpectralSnapshot| -> Result<f64> {
        let hm = h
            .at(snap.tau / traj.rate)
            .map_err(|source| FirstLawError::State { tau: snap.tau, source })?;
        qstate::energy_with_matrix(&snap.state, &hm).map_err(|source| FirstLawError::State { tau: snap.tau, source })
    };
    let u0 = energy_at(first)?;

    let mut rows = Vec::with_capacity(traj.snapshots.len());
    rows.push(LedgerRow {
        tau: first.tau,
        delta_u: 0.0,
        work: 0.0,
        heat: 0.0,
        coherence: 0.0,
    });
    let (mut work, mut heat, mut coherence) = (0.0, 0.0, 0.0);
    for (a, b) in traj.snapshots.iter().tuple_windows() {
        let d = a.dim();
        let (mut dw, mut dq, mut dc) = (0.0, 0.0, 0.0);
        for n in 0..d {
            let e_bar = 0.5 * (a.energies[n] + b.energies[n]);
            let e_diff = b.energies[n] - a.energies[n];
            for k in 0..d {
                let rho_bar = 0.5 * (a.eigenvalues[k] + b.eigenvalues[k]);
                let rho_diff = b.eigenvalues[k] - a.eigenvalues[k];
                let o_bar = 0.5 * (a.overlap[n][k] + b.overlap[n][k]);
                let o_diff = b.overlap[n][k] - a.overlap[n][k];
                dw += rho_bar * o_bar * e_diff;
                dq += e_bar * o_bar * rho_diff;
                dc += e_bar * rho_bar * o_diff;
            }
        }
        work += dw;
        heat += dq;
        coherence += dc;
        rows.push(LedgerRow {
            tau: b.tau,
            delta_u: energy_at(b)? - u0,
            work,
            heat,
            coherence,
        });
    }
    Ok(EnergeticsLedger { rows })
}

/// Trajectory and ledger in one call.
pub fn run(
    spec: &ChannelSpec,
    rho0: &DensityOperator,
    h: &Hamiltonian,
    grid: &TimeGrid,
) -> Result<(SpectralTrajectory, EnergeticsLedger)> {
    let traj = spectral_trajectory(spec, rho0, h, grid)?;
    let ledger = integrate_first_law(&traj, h)?;
    Ok((traj, ledger))
}
