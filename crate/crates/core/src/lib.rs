//! Low-lying quantum spectra from Monte Carlo transition amplitudes.
//!
//! The pipeline estimates imaginary-time matrix elements
//! ⟨x'| e^{−HT/ħ} |x⟩ between localized basis states by sampling free-path
//! ensembles and averaging the potential weight e^{−∫V dt/ħ} along each
//! path. Scaled by the basis cell measures, these elements form a symmetric
//! transition matrix whose eigenvalues λ_n give effective energies
//! E_n = −(ħ/T) ln λ_n and whose eigenvectors give wave functions at the
//! basis nodes; the retained ladder feeds canonical-ensemble sums.
//!
//! Modules, in pipeline order:
//! - [`model`]: potentials, geometries, physical constants, actions.
//! - [`streams`]: deterministic RNG stream derivation.
//! - [`sampler`]: free-path ensembles (exact bridge draws or Metropolis)
//!   and the ⟨e^{−∫V dt/ħ}⟩ estimator with batch-means errors.
//! - [`basis`]: regular grids and stochastic (importance-drawn) node sets.
//! - [`transition`]: kernel prefactor and matrix assembly.
//! - [`spectral`]: diagonalization, eigenvalue floor, thermodynamics.
//! - [`oracle`], [`oracle_grid`]: independent reference spectra.
//! - [`config`], [`report`], [`runner`]: file formats and orchestration.

// Validation deliberately writes `!(x > 0.0)`: the negation rejects NaN,
// which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod config;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod oracle_grid;
pub mod report;
pub mod runner;
pub mod sampler;
pub mod spectral;
pub mod streams;
pub mod transition;

pub use error::{McError, Result};
