//! Phase-space scattering laboratory.
//!
//! The crate implements the Weyl symbol calculus on a periodic phase-space
//! grid, the Moyal star product in two independent realizations, scattering
//! operators for quadratic-plus-pulse Hamiltonians by two independent routes,
//! operator Green functions by numerical functional differentiation, a formal
//! Weyl-Moyal algebra of free-field functionals with its star-Dyson series and
//! principal-value contraction kernels, and the classical side of the
//! correspondence (Duffing dynamics, action functionals, the covariant
//! Hamiltonian formalism, and a 1+1D Klein-Gordon lattice solver).
//!
//! Every major capability has a runnable example under `examples/`; the
//! `wmlab` binary runs the same suites from a config file and writes
//! machine-readable reports.

pub mod classical;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fourier;
pub mod green;
pub mod moyal;
pub mod perturbation;
pub mod phase_space;
pub mod scenario;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use phase_space::{OperatorMatrix, PhaseSpaceGrid, Symbol, WaveFunction};
