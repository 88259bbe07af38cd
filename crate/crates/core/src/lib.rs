//! Decoherence in the Caldeira-Leggett model from the complex saddle point of the
//! discretized real-time path integral.
//!
//! The pipeline for one time point is
//! [`params`] → [`contour`] → [`assembly::assemble`] → [`solver::factorize`] →
//! [`observables::compute_jk`]. The [`oracle`] module evolves the full Gaussian state
//! in continuous time as an independent check.

pub mod assembly;
pub mod cli;
pub mod contour;
pub mod error;
pub mod observables;
pub mod oracle;
pub mod params;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
