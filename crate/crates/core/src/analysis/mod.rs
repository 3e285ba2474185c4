//! Post-processing of traces: spectra, extrema, delays, emission phase and
//! least-squares fits.

pub mod emission;
pub mod extrema;
pub mod fft;
pub mod fit;

pub use emission::{delay_time, emission_phase, first_emission_maximum, first_emission_window, TimeWindow};
pub use extrema::{collapse_revival_count, extract_extrema, Extremum, ExtremumKind};
pub use fft::{fft_series, fid_fft, fid_fft_with, peak_separation, peak_separation_with, FftOptions, FftSpectrum, Window};
pub use fit::{fit_delay_model, fit_power_law, levenberg_marquardt, FitResult, LmOptions};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("time grid is not uniform at sample {index}")]
    NonUniformGrid { index: usize },
    #[error("not enough samples: need {needed}, have {have}")]
    TooFewSamples { needed: usize, have: usize },
    #[error("fewer than two peaks above the prominence threshold (found {found})")]
    FewerThanTwoPeaks { found: usize },
    #[error("no {0} found")]
    MissingFeature(&'static str),
    #[error("signal amplitude below threshold in the analysis window")]
    BelowThreshold,
    #[error("invalid fit input: {0}")]
    InvalidData(String),
    #[error("fit did not converge after {iterations} iterations (last parameters {last:?})")]
    NotConverged { iterations: usize, last: Vec<f64> },
    #[error("singular normal equations")]
    Singular,
}
