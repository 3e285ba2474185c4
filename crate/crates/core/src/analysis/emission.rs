//! Timing and phase of the field re-emitted after the pulse.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::{dominant_frequency, fft_series, Window};
use super::AnalysisError;
use crate::semiclassical::tipping::{first_minimum_after, parabolic_offset};
use crate::semiclassical::SimulationTrace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t_start: f64,
    pub t_end: f64,
}

fn refined_time(trace: &SimulationTrace, n: &[f64], k: usize) -> f64 {
    trace.times[k] + parabolic_offset(n[k - 1], n[k], n[k + 1]) * trace.dt()
}

fn next_maximum(n: &[f64], from: usize) -> Option<usize> {
    (from.max(1)..n.len().saturating_sub(1)).find(|&k| n[k] > n[k - 1] && n[k] >= n[k + 1])
}

/// Time of the first maximum of the photon number after the field has been
/// fully absorbed following the pulse (first post-drive minimum).
pub fn first_emission_maximum(trace: &SimulationTrace) -> Result<f64, AnalysisError> {
    let n = trace.photon_number();
    let k3 = first_minimum_after(&trace.times, &n, trace.drive_end()).ok_or(AnalysisError::MissingFeature("post-drive minimum"))?;
    let k4 = next_maximum(&n, k3 + 1).ok_or(AnalysisError::MissingFeature("emission maximum"))?;
    Ok(refined_time(trace, &n, k4))
}

/// Emission delay of `trace` relative to `baseline`.
pub fn delay_time(trace: &SimulationTrace, baseline: &SimulationTrace) -> Result<f64, AnalysisError> {
    Ok(first_emission_maximum(trace)? - first_emission_maximum(baseline)?)
}

/// Interval between the first and second post-drive minima of `n(t)`: one
/// full emission lobe.
pub fn first_emission_window(trace: &SimulationTrace) -> Result<TimeWindow, AnalysisError> {
    let n = trace.photon_number();
    let k3 = first_minimum_after(&trace.times, &n, trace.drive_end()).ok_or(AnalysisError::MissingFeature("post-drive minimum"))?;
    let k5 = first_minimum_after(&trace.times, &n, trace.times[k3]).ok_or(AnalysisError::MissingFeature("second post-drive minimum"))?;
    Ok(TimeWindow {
        t_start: trace.times[k3],
        t_end: trace.times[k5],
    })
}

/// Energy-weighted circular mean of `arg a(t)` over `window` after removing
/// the rotation at the dominant spectral line; result in `[0, 2π)`.
pub fn emission_phase(trace: &SimulationTrace, window: &TimeWindow) -> Result<f64, AnalysisError> {
    let i0 = trace.index_at(window.t_start);
    let i1 = trace.index_at(window.t_end).min(trace.len());
    if i1 < i0 + 3 {
        return Err(AnalysisError::TooFewSamples {
            needed: 3,
            have: i1.saturating_sub(i0),
        });
    }
    let times = &trace.times[i0..i1];
    let a = &trace.a[i0..i1];
    let floor = 1e-12 * trace.a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if !(a.iter().map(|x| x.norm()).fold(0.0, f64::max) > floor) || floor == 0.0 {
        return Err(AnalysisError::BelowThreshold);
    }
    let f_d = dominant_frequency(&fft_series(times, a, Window::Rectangular, 8)?);
    let z: Complex64 = times
        .iter()
        .zip(a)
        .map(|(&t, &x)| x * x.norm() * Complex64::from_polar(1.0, -TAU * f_d * t))
        .sum();
    if z.norm() == 0.0 {
        return Err(AnalysisError::BelowThreshold);
    }
    Ok(z.arg().rem_euclid(TAU))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;
    use crate::semiclassical::{run_fid, DriveEnvelope, FidExperiment};

    fn fid(phase: f64) -> SimulationTrace {
        let p = PhysicalParams::paper_2016();
        let v = 4.2e6 * p.n_spins.sqrt();
        let mut exp = FidExperiment::new(p, DriveEnvelope::rectangular(v, 200e-9, phase).unwrap());
        exp.t_total = 8e-6;
        run_fid(&exp).unwrap()
    }

    #[test]
    fn self_delay_is_zero() {
        let tr = fid(0.0);
        assert_eq!(delay_time(&tr, &tr).unwrap(), 0.0);
    }

    #[test]
    fn phase_follows_drive_phase() {
        let a = fid(0.0);
        let b = fid(1.1);
        let w = first_emission_window(&a).unwrap();
        let pa = emission_phase(&a, &w).unwrap();
        let pb = emission_phase(&b, &w).unwrap();
        let d = (pb - pa).rem_euclid(TAU);
        assert!((d - 1.1).abs() < 1e-6, "{d}");
    }

    #[test]
    fn first_lobe_is_opposite_to_drive() {
        let tr = fid(0.0);
        let w = first_emission_window(&tr).unwrap();
        let ph = emission_phase(&tr, &w).unwrap();
        // the field driven by -i V points along -i; the first re-emission is reversed
        let driven = tr.a[tr.index_at(100e-9)].arg().rem_euclid(TAU);
        let diff = (ph - driven).rem_euclid(TAU);
        assert!((diff - std::f64::consts::PI).abs() < 1e-9, "{diff}");
    }

    #[test]
    fn zero_trace_errors() {
        let p = PhysicalParams::paper_2016();
        let mut exp = FidExperiment::new(p, DriveEnvelope::none());
        exp.t_total = 2e-6;
        let tr = run_fid(&exp).unwrap();
        assert!(first_emission_maximum(&tr).is_err());
        let w = TimeWindow { t_start: 0.5e-6, t_end: 1.5e-6 };
        assert_eq!(emission_phase(&tr, &w), Err(AnalysisError::BelowThreshold));
    }
}
