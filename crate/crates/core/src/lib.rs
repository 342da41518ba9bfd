//! Exact-diagonalization simulator for Lipkin-Meshkov-Glick quantum batteries.
//!
//! The battery lives in the symmetric (Dicke) sector of `N` spin-1/2
//! particles, dimension `N + 1`. Charging is either a sudden field quench
//! ([`quench`]) or coupling to a single bosonic mode ([`bath`]).

pub mod bath;
pub mod dicke;
pub mod ergotropy;
pub mod error;
pub mod experiment;
pub mod quench;
pub mod spectral;

pub use dicke::{build_lmg_hamiltonian, Basis, CollectiveSpinBasis, LmgParams, OperatorMatrix};
pub use error::{Error, Result};
pub use quench::{Quench, QuenchSpec, TOptRule};
pub use spectral::{diagonalize, SpectralDecomposition, StateVector};

/// Crate version, stamped into output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
