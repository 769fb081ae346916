//! Energetics of a finite-dimensional quantum system driven through
//! non-dissipative Kraus channels, split into work, heat and coherence
//! contributions of the extended first law dU = dW + dQ + dC.
//!
//! The pipeline is: prepare a state ([`qstate`]), evolve it through a channel
//! ([`channel`]), follow the eigen-branches of ρ(τ) and integrate the three
//! energy fluxes ([`firstlaw`]). [`oracle`] holds the closed-form qubit
//! results the numerics are checked against, and [`verify`] bundles those
//! checks into a runnable report.
//!
//! ```
//! use qfirstlaw::channel::ChannelSpec;
//! use qfirstlaw::firstlaw::{integrate_first_law, spectral_trajectory, TimeGrid};
//! use qfirstlaw::qstate::{prepare_pure_state, Hamiltonian, InitialStatePrep};
//!
//! let rho0 = prepare_pure_state(InitialStatePrep::new(std::f64::consts::PI / 6.0, 0.0));
//! let h = Hamiltonian::two_level(0.0, 1.0);
//! let grid = TimeGrid::new(8.0, 4000).unwrap();
//! let traj = spectral_trajectory(&ChannelSpec::phase_damping(1.0), &rho0, &h, &grid).unwrap();
//! let ledger = integrate_first_law(&traj, &h).unwrap();
//! let last = ledger.last();
//! assert!((last.heat + last.coherence).abs() < 5e-6);
//! ```

pub mod channel;
pub mod cli;
pub mod csv;
pub mod cxmat;
pub mod exprparse;
pub mod firstlaw;
pub mod oracle;
pub mod qstate;
pub mod validation;
pub mod verify;

pub use cxmat::{hermitian_eigen, ComplexMatrix, HermitianEigenDecomposition};
pub use num_complex::Complex64;
