//! Exact Tavis-Cummings evolution in the symmetric spin sector for small
//! ensembles, used as ground truth for the mean-field model.

pub mod basis;
pub mod evolve;
pub mod generator;
pub mod sparse;
pub mod state;

pub use basis::DickeFockBasis;
pub use evolve::{evolve_exact, exact_delay_statistics, DelayStatistics, DissipationRates, ExpectationTrace, OracleOptions, TimeGrid};
pub use generator::{build_tc_generator, TcGenerator};
pub use sparse::CsrMatrix;
pub use state::QuantumState;

use thiserror::Error;

use crate::integrator::IntegratorError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("{what} size {size} exceeds the configured cap {cap}")]
    DimensionCap { what: &'static str, size: usize, cap: usize },
    #[error("Fock cutoff n_max = {n_max} too small: population of the top level reached {max_population:e}")]
    FockCutoff { n_max: usize, max_population: f64 },
    #[error("propagation failed: {0}")]
    Integrator(#[from] IntegratorError),
    #[error("no emission peak found in the decay trace")]
    NoPeak,
}
