//! Collective dynamics of a large pseudospin coupled to a single cavity
//! mode: mean-field Maxwell-Bloch simulation, an exact Tavis-Cummings
//! oracle for small ensembles, linear-response spectroscopy, and the
//! analysis routines that turn traces into splittings, delays and phases.
//!
//! Internal frequencies and rates are angular (rad/s); files use Hz.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod integrator;
pub mod io;
pub mod oracle;
pub mod params;
pub mod rootfind;
pub mod semiclassical;
pub mod spectroscopy;
pub mod state;

pub use params::{ParamError, ParamsHz, PhysicalParams, RegimeFlags, PAPER_2016};
pub use state::{BlochCoordinates, SemiclassicalState};

use thiserror::Error;

/// Union of the module errors for callers that chain several stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Integrator(#[from] integrator::IntegratorError),
    #[error(transparent)]
    Semiclassical(#[from] semiclassical::SemiclassicalError),
    #[error(transparent)]
    Spectroscopy(#[from] spectroscopy::SpectroscopyError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    Analysis(#[from] analysis::AnalysisError),
    #[error(transparent)]
    Io(#[from] io::IoError),
}
