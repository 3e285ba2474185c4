//! Maxwell-Bloch dynamics of the pseudospin coupled to the cavity, pulsed
//! experiments built on it, and diagnostics of the resulting traces.

pub mod concavity;
pub mod drive;
pub mod linear;
pub mod model;
pub mod tipping;

pub use concavity::{concavity_check, ConcavityRecord};
pub use drive::{DriveEnvelope, DriveError, DriveSegment};
pub use linear::linearized_response;
pub use model::{maxwell_bloch_rhs, run_fid, simulate, FidExperiment, SimulationTrace};
pub use tipping::{calibrate_drive, power_sweep, tip_angle, CalibrationOptions, SweepPoint};

use thiserror::Error;

use crate::integrator::IntegratorError;
use crate::params::ParamError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemiclassicalError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Drive(#[from] DriveError),
    #[error("integration failed ({context}): {source}")]
    Integrator {
        context: String,
        #[source]
        source: IntegratorError,
    },
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
    #[error("no local minimum of the photon number after the drive ends (t > {drive_end:e} s)")]
    NoMinimum { drive_end: f64 },
    #[error("tip angle {target:.6} rad not bracketed over normalized amplitudes [0, {scanned_max:e}] (reached {reached:.6} rad)")]
    NotBracketed { target: f64, scanned_max: f64, reached: f64 },
    #[error("calibration did not converge: {0}")]
    Calibration(String),
    #[error("output_dt = {dt:e} s too coarse for finite differences; use output_dt <= {required:e} s")]
    GridTooCoarse { dt: f64, required: f64 },
    #[error("linearized solution undefined: {0}")]
    Singular(String),
}
