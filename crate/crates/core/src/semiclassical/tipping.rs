//! Tipping angle of the prepared pseudospin and drive calibration.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use super::drive::DriveEnvelope;
use super::model::{run_fid, FidExperiment, SimulationTrace};
use super::SemiclassicalError;
use crate::params::PhysicalParams;
use crate::rootfind::{brent, BrentOptions, RootError};

/// Index of the first strict local minimum of `n` after `t_after`.
pub(crate) fn first_minimum_after(times: &[f64], n: &[f64], t_after: f64) -> Option<usize> {
    (1..n.len().saturating_sub(1)).find(|&k| times[k] > t_after && n[k - 1] > n[k] && n[k] <= n[k + 1])
}

/// Vertex offset in samples of the parabola through three points, in [-1/2, 1/2].
pub(crate) fn parabolic_offset(ym: f64, y0: f64, yp: f64) -> f64 {
    let den = ym - 2.0 * y0 + yp;
    if den == 0.0 {
        0.0
    } else {
        (0.5 * (ym - yp) / den).clamp(-0.5, 0.5)
    }
}

fn lagrange3<T>(vm: T, v0: T, vp: T, d: f64) -> T
where
    T: std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    vm * (0.5 * d * (d - 1.0)) + v0 * (1.0 - d * d) + vp * (0.5 * d * (d + 1.0))
}

/// Polar angle of the pseudospin at the first photon-number minimum after the
/// drive, continued past `π` when the pulse over-rotates.
///
/// The branch is tracked by following the signed angle in the plane spanned
/// by the drive axis and `S_z` from the start of the trace.
pub fn tip_angle(trace: &SimulationTrace) -> Result<f64, SemiclassicalError> {
    let drive_end = trace.drive_end();
    let n = trace.photon_number();
    let k = first_minimum_after(&trace.times, &n, drive_end).ok_or(SemiclassicalError::NoMinimum { drive_end })?;

    // -i V e^{i phi} tips s_- towards -e^{i phi}
    let u = -Complex64::from_polar(1.0, trace.drive.reference_phase().unwrap_or(0.0));
    let signed = |j: usize| (trace.s_minus[j] * u.conj()).re.atan2(-trace.s_z[j]);
    let mut psi = signed(0);
    let mut prev = psi;
    for j in 1..=k {
        let cur = signed(j);
        let mut d = cur - prev;
        d -= TAU * (d / TAU).round();
        psi += d;
        prev = cur;
    }

    let d = parabolic_offset(n[k - 1], n[k], n[k + 1]);
    let s = lagrange3(trace.s_minus[k - 1], trace.s_minus[k], trace.s_minus[k + 1], d);
    let z = lagrange3(trace.s_z[k - 1], trace.s_z[k], trace.s_z[k + 1], d);
    let base = s.norm().atan2(-z);

    let m = (psi / TAU).round();
    let best = [m - 1.0, m, m + 1.0]
        .iter()
        .flat_map(|&mm| [TAU * mm + base, TAU * mm - base])
        .min_by(|a, b| (a - psi).abs().total_cmp(&(b - psi).abs()))
        .unwrap_or(base);
    Ok(best)
}

/// Settings for [`calibrate_drive`] and [`power_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Accepted |tip_angle - target|, rad.
    pub theta_tol: f64,
    /// Length of each trial run, s.
    pub t_window: f64,
    pub output_dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Amplitude samples used to bracket the target.
    pub scan_points: usize,
    pub phase: f64,
    pub dead_time: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            theta_tol: 1e-3,
            t_window: FidExperiment::DEFAULT_T_TOTAL,
            output_dt: FidExperiment::DEFAULT_OUTPUT_DT,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            scan_points: 40,
            phase: 0.0,
            dead_time: FidExperiment::DEFAULT_DEAD_TIME,
        }
    }
}

impl CalibrationOptions {
    fn experiment(&self, params: &PhysicalParams, amplitude: f64, pulse: f64, t_total: f64) -> Result<FidExperiment, SemiclassicalError> {
        let drive = DriveEnvelope::rectangular(amplitude, pulse, self.phase)?;
        let mut exp = FidExperiment::new(*params, drive);
        exp.t_total = t_total;
        exp.output_dt = self.output_dt;
        exp.rel_tol = self.rel_tol;
        exp.abs_tol = self.abs_tol;
        exp.dead_time = self.dead_time;
        Ok(exp)
    }
}

/// Tip angle reached by a rectangular pulse of physical amplitude `amplitude`.
pub fn tip_angle_for(
    params: &PhysicalParams,
    amplitude: f64,
    pulse_duration: f64,
    opts: &CalibrationOptions,
) -> Result<f64, SemiclassicalError> {
    if amplitude == 0.0 {
        return Ok(0.0);
    }
    let exp = opts.experiment(params, amplitude, pulse_duration, opts.t_window)?;
    tip_angle(&run_fid(&exp)?)
}

/// Physical drive amplitude (rad/s * sqrt(photons)) of a rectangular pulse of
/// length `pulse_duration` that prepares tip angle `target_theta`.
pub fn calibrate_drive(
    params: &PhysicalParams,
    target_theta: f64,
    pulse_duration: f64,
    opts: &CalibrationOptions,
) -> Result<f64, SemiclassicalError> {
    params.validate()?;
    if !(target_theta > 0.0 && target_theta.is_finite()) {
        return Err(SemiclassicalError::InvalidExperiment(format!(
            "target tip angle must be positive, got {target_theta}"
        )));
    }
    if !(pulse_duration > 0.0) || opts.t_window <= pulse_duration {
        return Err(SemiclassicalError::InvalidExperiment(
            "need 0 < pulse_duration < t_window".into(),
        ));
    }
    let sqrt_n = params.n_spins.sqrt();
    let theta_of = |v_norm: f64| tip_angle_for(params, v_norm * sqrt_n, pulse_duration, opts);

    // weak-drive estimate: theta ~ 2 v tau in normalized units
    let estimate = target_theta / (2.0 * pulse_duration);
    let points = opts.scan_points.max(4);
    let mut lo = 0.0;
    let mut reached = 0.0;
    let mut bracket = None;
    let mut span = 2.0 * estimate;
    'scan: for _ in 0..4 {
        let step = span / points as f64;
        for j in 1..=points {
            let v = lo + step * j as f64;
            let th = theta_of(v)?;
            reached = th;
            if th >= target_theta {
                bracket = Some((v - step, v));
                break 'scan;
            }
        }
        lo += span;
        span *= 2.0;
    }
    let (a, b) = bracket.ok_or(SemiclassicalError::NotBracketed {
        target: target_theta,
        scanned_max: lo,
        reached,
    })?;

    let opts_b = BrentOptions {
        x_tol: 0.0,
        f_tol: opts.theta_tol,
        max_iter: 100,
    };
    let v = brent(|v| theta_of(v).map(|th| th - target_theta), a, b, opts_b).map_err(|e| match e {
        RootError::Eval(err) => err,
        other => SemiclassicalError::Calibration(other.to_string()),
    })?;
    Ok(v * sqrt_n)
}

/// One element of a tip-angle sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub target_theta: f64,
    pub amplitude: f64,
    pub tip_angle: f64,
    pub trace: SimulationTrace,
}

/// Calibrates a pulse for every target angle and records the resulting FID.
/// Failures are reported per element; the sweep always completes.
pub fn power_sweep(
    params: &PhysicalParams,
    theta_grid: &[f64],
    pulse_duration: f64,
    t_total: f64,
    opts: &CalibrationOptions,
) -> Vec<Result<SweepPoint, SemiclassicalError>> {
    theta_grid
        .par_iter()
        .map(|&target| {
            let amplitude = calibrate_drive(params, target, pulse_duration, opts)?;
            let exp = opts.experiment(params, amplitude, pulse_duration, t_total)?;
            let trace = run_fid(&exp)?;
            let theta = tip_angle(&trace)?;
            Ok(SweepPoint {
                target_theta: target,
                amplitude,
                tip_angle: theta,
                trace,
            })
        })
        .collect()
}

/// Tip angle that leaves `k` excitations below the north pole, i.e. prepares
/// `S - M = k` for an ensemble of `n_spins`.
pub fn theta_for_excitations_below_top(n_spins: f64, k: f64) -> f64 {
    PI - 2.0 * (k / n_spins).sqrt().asin()
}
