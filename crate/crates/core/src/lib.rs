//! Exact-diagonalization laboratory for subsystem eigenstate thermalization
//! on translation-invariant spin chains.
//!
//! The crate is layered bottom-up: [`linalg`] provides dense complex matrices
//! and spectral functions, [`states`] and [`models`] build density matrices and
//! Hamiltonians, [`ensembles`] produces thermal and microcanonical states,
//! [`divergences`] holds the information-theoretic quantities, and
//! [`experiments`] turns them into CSV tables.

pub mod cli;
pub mod config;
pub mod divergences;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod models;
pub mod random;
pub mod runner;
pub mod states;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SpectralDecomposition, C64};
pub use models::{HamiltonianSpec, LatticeSpec};
pub use states::{BlockPartition, DensityMatrix, TransitionMatrix};
