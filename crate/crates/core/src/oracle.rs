//! Closed-form qubit results for the phase-damping and phase-flip channels.
//!
//! These are the reference curves the numerical pipeline in
//! [`crate::firstlaw`] is checked against. States evolve as
//!
//! ```text
//! phase damping:  ρ01(τ) = e^{−τ/2} ρ01      phase flip:  ρ01(τ) = (2e^{−τ} − 1) ρ01
//! ```
//!
//! with populations fixed, so the eigenvalues are ½(ρ00 + ρ11 ± √m) where
//! m = (ρ00 − ρ11)² + 4·f(τ)·|ρ01|² and f is the squared off-diagonal factor.
//!
//! The heat/coherence closed forms only exist for the θ = π/6 preparation;
//! [`OracleConfig`] refuses anything else.

use std::f64::consts::FRAC_PI_6;

use num_complex::Complex64;
use thiserror::Error;

use crate::cxmat::ComplexMatrix;
use crate::qstate::DensityOperator;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("closed forms require theta = pi/6, got {0}")]
    UnsupportedTheta(f64),
    #[error("closed forms require E_e >= E_g, got E_g={e_g}, E_e={e_e}")]
    InvertedLevels { e_g: f64, e_e: f64 },
    #[error("closed forms need a 2x2 state, got dimension {0}")]
    NotQubit(usize),
    #[error("logarithm argument {argument} is not positive at tau={tau}")]
    Domain { tau: f64, argument: f64 },
}

pub type Result<T> = std::result::Result<T, OracleError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleIntermediates {
    /// Discriminant (ρ00 − ρ11)² + 4·channel_factor·|ρ01|².
    pub m: f64,
    /// e^{−τ} for phase damping, (2e^{−τ} − 1)² for phase flip.
    pub channel_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub e_g: f64,
    pub e_e: f64,
    pub theta: f64,
}

impl OracleConfig {
    pub fn new(e_g: f64, e_e: f64, theta: f64) -> Result<Self> {
        if (theta - FRAC_PI_6).abs() > 1e-12 {
            return Err(OracleError::UnsupportedTheta(theta));
        }
        if e_e < e_g {
            return Err(OracleError::InvertedLevels { e_g, e_e });
        }
        Ok(Self { e_g, e_e, theta })
    }

    /// θ = π/6 with the given level energies.
    pub fn pi_over_six(e_g: f64, e_e: f64) -> Result<Self> {
        Self::new(e_g, e_e, FRAC_PI_6)
    }

    fn gap(&self) -> f64 {
        self.e_e - self.e_g
    }
}

/// Eigenpairs labelled as in the closed forms: index 0 carries the larger
/// eigenvalue ρ₀ = ½(tr + √m), index 1 the smaller.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEigensystem {
    pub eigenvalues: [f64; 2],
    pub eigenvectors: [[Complex64; 2]; 2],
    pub intermediates: OracleIntermediates,
}

fn qubit_entries(rho0: &DensityOperator) -> Result<(f64, f64, Complex64)> {
    if rho0.dim() != 2 {
        return Err(OracleError::NotQubit(rho0.dim()));
    }
    let m = rho0.matrix();
    Ok((m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]))
}

fn pd_factor(tau: f64) -> f64 {
    (-tau / 2.0).exp()
}

fn pf_factor(tau: f64) -> f64 {
    2.0 * (-tau).exp() - 1.0
}

fn evolved(rho0: &DensityOperator, factor: f64) -> Result<ComplexMatrix> {
    let (a, d, b) = qubit_entries(rho0)?;
    let b = b * factor;
    Ok(ComplexMatrix::from_rows(&[
        [Complex64::new(a, 0.0), b],
        [b.conj(), Complex64::new(d, 0.0)],
    ]))
}

/// ρ(τ) under phase damping: off-diagonals scaled by e^{−τ/2}.
pub fn pd_state(tau: f64, rho0: &DensityOperator) -> Result<ComplexMatrix> {
    evolved(rho0, pd_factor(tau))
}

/// ρ(τ) under phase flip: off-diagonals scaled by 2e^{−τ} − 1.
pub fn pf_state(tau: f64, rho0: &DensityOperator) -> Result<ComplexMatrix> {
    evolved(rho0, pf_factor(tau))
}

/// Eigensystem of ρ(τ) under phase damping.
///
/// Eigenvectors follow the (ρ00 − ρ11 ± √m, 2·s(τ)·ρ10) form with ρ10²
/// generalized to |ρ10|² in the normalizer. The factor that cancels is
/// recovered from (ρ00 − ρ11)² − m = −4|b|², so neither component is
/// computed by subtracting nearly equal numbers.
pub fn pd_eigensystem(tau: f64, rho0: &DensityOperator) -> Result<OracleEigensystem> {
    let f = pd_factor(tau);
    eigensystem(rho0, f, f * f)
}

/// Eigensystem of ρ(τ) under phase flip.
///
/// Same 2×2 closed form as [`pd_eigensystem`] with the unsquared off-diagonal
/// factor 2e^{−τ} − 1 in the eigenvector and its square in m.
pub fn pf_eigensystem(tau: f64, rho0: &DensityOperator) -> Result<OracleEigensystem> {
    let f = pf_factor(tau);
    eigensystem(rho0, f, f * f)
}

fn eigensystem(rho0: &DensityOperator, factor: f64, channel_factor: f64) -> Result<OracleEigensystem> {
    let (a, d, rho01) = qubit_entries(rho0)?;
    // b = ρ(τ)_10 = factor·ρ10
    let b = rho01.conj() * factor;
    let m = (a - d).powi(2) + 4.0 * channel_factor * rho01.norm_sqr();
    let root = m.sqrt();
    let trace = a + d;
    let eigenvalues = [0.5 * (trace + root), 0.5 * (trace - root)];

    let diff = a - d;
    let four_b2 = 4.0 * b.norm_sqr();
    // plus = diff + √m, minus = diff − √m, with plus·minus = −4|b|²
    let (plus, minus) = if diff >= 0.0 {
        let plus = diff + root;
        (plus, if plus == 0.0 { 0.0 } else { -four_b2 / plus })
    } else {
        let minus = diff - root;
        (-four_b2 / minus, minus)
    };

    let e_g = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let e_e = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let vector = |first: f64, fallback: [Complex64; 2]| {
        if four_b2 == 0.0 {
            return fallback;
        }
        let norm2 = first * first + four_b2;
        let n = norm2.sqrt();
        [Complex64::new(first / n, 0.0), b * (2.0 / n)]
    };
    // the degenerate fallback only triggers for already-diagonal ρ
    let (big, small) = if diff >= 0.0 { (e_g, e_e) } else { (e_e, e_g) };
    Ok(OracleEigensystem {
        eigenvalues,
        eigenvectors: [vector(plus, big), vector(minus, small)],
        intermediates: OracleIntermediates { m, channel_factor },
    })
}

/// Heat under phase damping, (E_e − E_g)/8 · [τ + ln 4 − ln(3 + e^τ)].
pub fn pd_heat(tau: f64, cfg: &OracleConfig) -> f64 {
    cfg.gap() / 8.0 * (tau + 4f64.ln() - (3.0 + tau.exp()).ln())
}

/// Coherence contribution under phase damping; the negative of [`pd_heat`].
pub fn pd_coherence(tau: f64, cfg: &OracleConfig) -> f64 {
    cfg.gap() / 8.0 * (-tau - 4f64.ln() + (3.0 + tau.exp()).ln())
}

fn checked_ln(tau: f64, argument: f64) -> Result<f64> {
    if argument > 0.0 {
        Ok(argument.ln())
    } else {
        Err(OracleError::Domain { tau, argument })
    }
}

/// Heat under phase flip for general level energies, term by term as the
/// four-bracket closed form is written.
pub fn pf_heat(tau: f64, cfg: &OracleConfig) -> Result<f64> {
    let et = tau.exp();
    let poly = et * et - 3.0 * et + 3.0;
    let root = poly.sqrt();
    let log_poly = checked_ln(tau, poly)?;
    let log_dec = checked_ln(tau, 3.0 * (-2.0 * tau).exp() - 3.0 * (-tau).exp() + 1.0)?;
    let x = 4.0 * (-tau).exp() * root;
    let (eg, ee) = (cfg.e_g, cfg.e_e);
    Ok(eg / 16.0 * (-4.0 + x - 2.0 * tau + log_poly)
        + eg / 16.0 * (4.0 - x - 2.0 * tau + log_poly)
        + ee / 16.0 * (-4.0 + x - log_dec)
        + ee / 16.0 * (4.0 - x - log_dec))
}

/// Coherence contribution under phase flip for general level energies.
pub fn pf_coherence(tau: f64, cfg: &OracleConfig) -> Result<f64> {
    let et = tau.exp();
    let poly = 3.0 - 3.0 * et + et * et;
    let log_poly = checked_ln(tau, poly)?;
    let y = et / poly.sqrt();
    let (eg, ee) = (cfg.e_g, cfg.e_e);
    Ok(eg / 16.0 * (1.0 + 2.0 * tau - log_poly - y)
        + eg / 16.0 * (-1.0 + 2.0 * tau - log_poly + y)
        + ee / 16.0 * (-1.0 - 2.0 * tau + log_poly + y)
        + ee / 16.0 * (1.0 - 2.0 * tau + log_poly - y))
}

/// Phase-flip heat for E_g = 0, E_e = 1: −⅛ ln(1 + 3e^{−2τ} − 3e^{−τ}).
pub fn pf_heat_unit(tau: f64) -> Result<f64> {
    Ok(-checked_ln(tau, 1.0 + 3.0 * (-2.0 * tau).exp() - 3.0 * (-tau).exp())? / 8.0)
}

/// Phase-flip coherence for E_g = 0, E_e = 1: ⅛[ln(3 + e^{2τ} − 3e^τ) − 2τ].
pub fn pf_coherence_unit(tau: f64) -> Result<f64> {
    let et = tau.exp();
    Ok((checked_ln(tau, 3.0 + et * et - 3.0 * et)? - 2.0 * tau) / 8.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxmat::{hermitian_eigen, inner};
    use crate::qstate::{prepare_pure_state, InitialStatePrep};
    use std::f64::consts::LN_2;

    fn unit() -> OracleConfig {
        OracleConfig::pi_over_six(0.0, 1.0).unwrap()
    }

    fn rho_pi6() -> DensityOperator {
        prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0))
    }

    #[test]
    fn config_gating() {
        assert!(matches!(OracleConfig::new(0.0, 1.0, 0.5), Err(OracleError::UnsupportedTheta(_))));
        assert!(matches!(
            OracleConfig::pi_over_six(1.0, 0.0),
            Err(OracleError::InvertedLevels { .. })
        ));
    }

    #[test]
    fn pd_eigensystem_examples() {
        let rho0 = rho_pi6();
        let e = pd_eigensystem(0.0, &rho0).unwrap();
        assert!((e.intermediates.m - 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-15 && e.eigenvalues[1].abs() < 1e-15);

        let e = pd_eigensystem(40.0, &rho0).unwrap();
        assert!((e.eigenvalues[0] - 0.75).abs() < 1e-15 && (e.eigenvalues[1] - 0.25).abs() < 1e-15);
        assert!((e.eigenvectors[0][0].norm() - 1.0).abs() < 1e-15);
        assert!((e.eigenvectors[1][1].norm() - 1.0).abs() < 1e-15);

        for i in 0..50 {
            let e = pd_eigensystem(i as f64 * 0.3, &rho0).unwrap();
            assert!((e.eigenvalues[0] + e.eigenvalues[1] - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn eigensystems_satisfy_eigen_equation() {
        for (theta, phi) in [(FRAC_PI_6, 0.0), (0.3, 1.2), (1.2, 4.0), (std::f64::consts::FRAC_PI_4, 0.0)] {
            let rho0 = prepare_pure_state(InitialStatePrep::new(theta, phi));
            for i in 0..=100 {
                let tau = i as f64 * 0.08;
                for (sys, state) in [
                    (pd_eigensystem(tau, &rho0).unwrap(), pd_state(tau, &rho0).unwrap()),
                    (pf_eigensystem(tau, &rho0).unwrap(), pf_state(tau, &rho0).unwrap()),
                ] {
                    for k in 0..2 {
                        let v = sys.eigenvectors[k];
                        let av = state.apply(&v).unwrap();
                        let res: f64 = av
                            .iter()
                            .zip(&v)
                            .map(|(x, y)| (x - y * sys.eigenvalues[k]).norm())
                            .fold(0.0, f64::max);
                        assert!(res <= 1e-12, "theta={theta} tau={tau} k={k} res={res}");
                        assert!((inner(&v, &v).re - 1.0).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_state_falls_back_to_computational_basis() {
        let rho = DensityOperator::new(ComplexMatrix::real_diagonal(&[0.25, 0.75])).unwrap();
        let e = pd_eigensystem(1.0, &rho).unwrap();
        assert_eq!(e.eigenvalues, [0.75, 0.25]);
        assert_eq!(e.eigenvectors[0][1], Complex64::new(1.0, 0.0));
        assert_eq!(e.eigenvectors[1][0], Complex64::new(1.0, 0.0));
        let mixed = DensityOperator::maximally_mixed(2);
        let e = pf_eigensystem(1.0, &mixed).unwrap();
        assert_eq!(e.eigenvalues, [0.5, 0.5]);
    }

    #[test]
    fn pd_eigensystem_matches_jacobi() {
        let rho0 = rho_pi6();
        for i in 0..100 {
            let tau = 8.0 * i as f64 / 99.0;
            let sys = pd_eigensystem(tau, &rho0).unwrap();
            let num = hermitian_eigen(&pd_state(tau, &rho0).unwrap(), 1e-12).unwrap();
            // numerical order is ascending, oracle order descending
            for k in 0..2 {
                assert!((sys.eigenvalues[k] - num.eigenvalues[1 - k]).abs() <= 1e-12);
                let overlap = inner(&sys.eigenvectors[k], &num.vector(1 - k)).norm();
                assert!((overlap - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn pd_heat_values() {
        let cfg = unit();
        assert_eq!(pd_heat(0.0, &cfg), 0.0);
        assert!((pd_heat(1.0, &cfg) - 0.080_328_247_561_401_4).abs() < 1e-15);
        assert!((pd_heat(8.0, &cfg) - 0.173_161_059_913_120_4).abs() < 1e-15);
        assert!((pd_heat(40.0, &cfg) - 4f64.ln() / 8.0).abs() < 1e-15);
        assert!((pd_coherence(1.0, &cfg) + 0.080_328_247_561_401_4).abs() < 1e-15);
        for i in 0..100 {
            let tau = i as f64 * 0.1;
            assert_eq!(pd_heat(tau, &cfg) + pd_coherence(tau, &cfg), 0.0);
        }
    }

    #[test]
    fn pd_heat_is_monotone() {
        let cfg = unit();
        let mut prev = pd_heat(0.0, &cfg);
        for i in 1..=4000 {
            let q = pd_heat(i as f64 * 0.002, &cfg);
            assert!(q >= prev);
            prev = q;
        }
    }

    #[test]
    fn pf_heat_values() {
        let cfg = unit();
        assert_eq!(pf_heat(0.0, &cfg).unwrap(), 0.0);
        assert!((pf_heat(LN_2, &cfg).unwrap() - 0.173_286_795_139_986_3).abs() < 1e-12);
        assert!((pf_heat(8.0, &cfg).unwrap() - 1.258_195_858_051_371e-4).abs() < 1e-12);
        assert!(pf_heat(40.0, &cfg).unwrap().abs() <= 1e-16);
        assert!((pf_coherence(LN_2, &cfg).unwrap() + 0.173_286_795_139_986_3).abs() < 1e-12);
        assert_eq!(pf_coherence(0.0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn pf_general_form_reduces_to_unit_form() {
        let cfg = unit();
        let general = OracleConfig::pi_over_six(0.3, 1.7).unwrap();
        for i in 0..=400 {
            let tau = i as f64 * 0.02;
            let q = pf_heat(tau, &cfg).unwrap();
            let c = pf_coherence(tau, &cfg).unwrap();
            assert!((q - pf_heat_unit(tau).unwrap()).abs() <= 1e-14);
            assert!((c - pf_coherence_unit(tau).unwrap()).abs() <= 1e-14);
            assert!((q + c).abs() <= 1e-14);
            assert!(q >= 0.0);
            assert!((pf_heat(tau, &general).unwrap() - 1.4 * q).abs() <= 1e-12);
            assert!((pf_coherence(tau, &general).unwrap() - 1.4 * c).abs() <= 1e-12);
        }
    }

    #[test]
    fn pf_heat_peaks_at_ln2() {
        let cfg = unit();
        let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.002).collect();
        let (best, _) = grid
            .iter()
            .map(|&t| pf_heat(t, &cfg).unwrap())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(best, (LN_2 / 0.002).round() as usize);
    }
}
