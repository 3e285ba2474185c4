//! Experiment execution. Simulations run on the ambient rayon pool; results
//! are collected in input order and written single-threaded, so payloads do
//! not depend on the pool size.

use std::f64::consts::TAU;

use anyhow::Result;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use pseudospin::analysis::{
    collapse_revival_count, delay_time, emission_phase, fid_fft, first_emission_window, fit_delay_model, fit_power_law,
    peak_separation, FftSpectrum, Window,
};
use pseudospin::integrator::IntegratorConfig;
use pseudospin::io::{expectation_csv, fft_csv, fft_metadata, map_axes, map_csv, spectrum_csv, trace_csv, trace_metadata};
use pseudospin::oracle::{build_tc_generator, evolve_exact, DickeFockBasis, DissipationRates, ExpectationTrace, OracleOptions, QuantumState, TimeGrid};
use pseudospin::semiclassical::{
    calibrate_drive, power_sweep, run_fid, simulate, tip_angle, CalibrationOptions, DriveEnvelope, FidExperiment,
    SimulationTrace,
};
use pseudospin::spectroscopy::{avoided_crossing_map, centered_grid, dip_separation, find_dips, polariton_modes, s11_spectrum};
use pseudospin::{PhysicalParams, SemiclassicalState};

use crate::config::{
    geomspace, linspace, DelayFitSpec, ExperimentConfig, ExperimentSpec, FidSpec, HoldFixed, NSweepSpec,
    OracleCompareSpec, S11MapSpec, SweepSpec, Timing,
};
use crate::output::{Failure, RunDir};

/// What an experiment produced besides its artifacts.
pub struct Outcome {
    pub failures: Vec<Failure>,
    pub summary: Value,
}

pub fn execute(cfg: &ExperimentConfig, dir: &mut RunDir) -> Result<Outcome> {
    let p = cfg.physical();
    match &cfg.experiment {
        ExperimentSpec::Fid(s) => fid(&p, s, dir),
        ExperimentSpec::PowerSweep(s) => sweep(&p, s, dir),
        ExperimentSpec::NSweep(s) => n_sweep(&p, s, dir),
        ExperimentSpec::S11Map(s) => s11_map(&p, s, dir),
        ExperimentSpec::DelayFit(s) => delay_fit(&p, s, dir),
        ExperimentSpec::OracleCompare(s) => oracle_compare(&p, s, dir),
    }
}

fn calibration(t: &Timing) -> CalibrationOptions {
    CalibrationOptions {
        theta_tol: t.theta_tol_deg.to_radians(),
        t_window: t.t_total_s,
        output_dt: t.output_dt_s,
        phase: t.drive_phase_deg.to_radians(),
        dead_time: t.dead_time_s,
        ..Default::default()
    }
}

fn fid_run(p: &PhysicalParams, amplitude: f64, t: &Timing) -> Result<SimulationTrace, String> {
    let drive = if amplitude == 0.0 {
        DriveEnvelope::none()
    } else {
        DriveEnvelope::rectangular(amplitude, t.pulse_s, t.drive_phase_deg.to_radians()).map_err(|e| e.to_string())?
    };
    let mut exp = FidExperiment::new(*p, drive);
    exp.t_total = t.t_total_s;
    exp.output_dt = t.output_dt_s;
    exp.dead_time = t.dead_time_s;
    run_fid(&exp).map_err(|e| e.to_string())
}

fn calibrated_run(p: &PhysicalParams, theta_deg: f64, t: &Timing) -> Result<(f64, SimulationTrace), String> {
    let v = calibrate_drive(p, theta_deg.to_radians(), t.pulse_s, &calibration(t)).map_err(|e| e.to_string())?;
    Ok((v, fid_run(p, v, t)?))
}

fn write_trace(dir: &mut RunDir, name: &str, trace: &SimulationTrace) -> Result<()> {
    let csv = trace_csv(trace);
    dir.write(&format!("{name}.csv"), "trace", csv.as_bytes())?;
    dir.write_json(&format!("{name}.json"), "trace_metadata", &trace_metadata(trace, &csv))
}

fn write_fft(dir: &mut RunDir, name: &str, spec: &FftSpectrum) -> Result<()> {
    let csv = fft_csv(spec);
    dir.write(&format!("{name}.fft.csv"), "fft", csv.as_bytes())?;
    dir.write_json(&format!("{name}.fft.json"), "fft_metadata", &fft_metadata(spec, &csv))
}

fn opt(r: &Result<f64, String>) -> Value {
    r.as_ref().map_or(Value::Null, |v| json!(v))
}

fn fid(p: &PhysicalParams, s: &FidSpec, dir: &mut RunDir) -> Result<Outcome> {
    let t = &s.timing;
    let run = match (s.theta_deg, s.drive_amplitude_hz) {
        (Some(theta), _) => calibrated_run(p, theta, t),
        (None, Some(hz)) => fid_run(p, TAU * hz, t).map(|tr| (TAU * hz, tr)),
        (None, None) => unreachable!("validated config"),
    };
    let (v, trace) = match run {
        Ok(r) => r,
        Err(e) => {
            return Ok(Outcome {
                failures: vec![Failure::new(0, "fid", "simulation", e)],
                summary: json!({ "kind": "fid" }),
            })
        }
    };
    write_trace(dir, "0", &trace)?;
    if v == 0.0 {
        return Ok(Outcome {
            failures: Vec::new(),
            summary: json!({
                "kind": "fid",
                "degenerate": true,
                "note": "zero drive amplitude: the system stays in its ground state and the trace is identically zero",
                "drive_amplitude_hz": 0.0,
            }),
        });
    }
    let mut failures = Vec::new();
    let theta = tip_angle(&trace).map_err(|e| e.to_string());
    let splitting = match fid_fft(&trace, Window::Rectangular, true) {
        Ok(spec) => {
            write_fft(dir, "0", &spec)?;
            peak_separation(&spec).map_err(|e| e.to_string())
        }
        Err(e) => Err(e.to_string()),
    };
    if let Err(e) = &splitting {
        failures.push(Failure::new(0, "fid", "analysis", e));
    }
    let k0 = trace.index_at(trace.drive_end());
    let collapses = collapse_revival_count(&trace.times[k0..], &trace.abs_a()[k0..], 1e-3);
    let phase = first_emission_window(&trace)
        .and_then(|w| emission_phase(&trace, &w))
        .map_err(|e| e.to_string());
    Ok(Outcome {
        failures,
        summary: json!({
            "kind": "fid",
            "degenerate": false,
            "drive_amplitude_hz": v / TAU,
            "tip_angle_deg": opt(&theta.map(f64::to_degrees)),
            "splitting_hz": opt(&splitting),
            "expected_splitting_hz": p.rabi_splitting() / TAU,
            "collapse_revival_minima": collapses,
            "emission_phase_rad": opt(&phase),
        }),
    })
}

fn sweep(p: &PhysicalParams, s: &SweepSpec, dir: &mut RunDir) -> Result<Outcome> {
    let t = &s.timing;
    let degrees = s.grid.degrees()?;
    let thetas: Vec<f64> = degrees.iter().map(|d| d.to_radians()).collect();
    let results = power_sweep(p, &thetas, t.pulse_s, t.t_total_s, &calibration(t));
    let mut failures = Vec::new();
    let mut points = Vec::new();
    let mut phases: Vec<(f64, f64)> = Vec::new();
    for (k, (deg, r)) in degrees.iter().zip(results).enumerate() {
        let label = format!("theta_deg={deg}");
        let sp = match r {
            Ok(sp) => sp,
            Err(e) => {
                failures.push(Failure::new(k, label, "simulation", e));
                continue;
            }
        };
        write_trace(dir, &k.to_string(), &sp.trace)?;
        let phase = first_emission_window(&sp.trace)
            .and_then(|w| emission_phase(&sp.trace, &w))
            .map_err(|e| e.to_string());
        match &phase {
            Ok(ph) => phases.push((*deg, *ph)),
            Err(e) => failures.push(Failure::new(k, label, "analysis", e)),
        }
        points.push(json!({
            "index": k,
            "theta_deg": deg,
            "tip_angle_deg": sp.tip_angle.to_degrees(),
            "drive_amplitude_hz": sp.amplitude / TAU,
            "emission_phase_rad": opt(&phase),
        }));
    }
    // nearest angles strictly on either side of the inversion
    let below = phases.iter().filter(|q| q.0 < 180.0).max_by(|a, b| a.0.total_cmp(&b.0));
    let above = phases.iter().filter(|q| q.0 > 180.0).min_by(|a, b| a.0.total_cmp(&b.0));
    let jump = match (below, above) {
        (Some(b), Some(a)) => json!({
            "below_deg": b.0,
            "above_deg": a.0,
            "phase_difference_rad": (a.1 - b.1).rem_euclid(TAU),
        }),
        _ => Value::Null,
    };
    Ok(Outcome {
        failures,
        summary: json!({ "kind": "power_sweep", "points": points, "phase_discontinuity": jump }),
    })
}

fn n_sweep(p: &PhysicalParams, s: &NSweepSpec, dir: &mut RunDir) -> Result<Outcome> {
    let t = &s.timing;
    let ns = geomspace(s.n_start, s.n_stop, s.n_points);
    let runs: Vec<Result<(SimulationTrace, Option<FftSpectrum>), String>> = ns
        .par_iter()
        .map(|&n| {
            let q = match s.hold_fixed {
                HoldFixed::Coupling => p.with_n_spins(n),
                HoldFixed::Collective => p.with_n_spins_fixed_collective(n),
            };
            let (_, tr) = calibrated_run(&q, s.theta_deg, t)?;
            let spec = fid_fft(&tr, Window::Rectangular, true).ok();
            Ok((tr, spec))
        })
        .collect();
    let mut failures = Vec::new();
    let mut points = Vec::new();
    let mut resolved = Vec::new();
    for (k, (n, r)) in ns.iter().zip(runs).enumerate() {
        let label = format!("n_spins={n:e}");
        let (tr, spec) = match r {
            Ok(x) => x,
            Err(e) => {
                failures.push(Failure::new(k, label, "simulation", e));
                continue;
            }
        };
        write_trace(dir, &k.to_string(), &tr)?;
        let sep = match &spec {
            Some(sp) => {
                write_fft(dir, &k.to_string(), sp)?;
                peak_separation(sp).map_err(|e| e.to_string())
            }
            None => Err("spectrum unavailable".to_string()),
        };
        match &sep {
            Ok(v) => resolved.push((*n, *v)),
            Err(e) => failures.push(Failure::new(k, label, "analysis", e)),
        }
        points.push(json!({ "index": k, "n_spins": n, "splitting_hz": opt(&sep) }));
    }
    let fit = if resolved.len() >= 2 {
        let xs: Vec<f64> = resolved.iter().map(|r| r.0).collect();
        let ys: Vec<f64> = resolved.iter().map(|r| r.1).collect();
        match fit_power_law(&xs, &ys) {
            Ok(f) => json!({
                "exponent": f.values[0],
                "exponent_std_error": f.std_errors[0],
                "prefactor_hz": f.values[1],
                "r_squared": f.r_squared,
                "points_used": resolved.len(),
            }),
            Err(e) => {
                failures.push(Failure::new(ns.len(), "power_law_fit", "fit", e));
                Value::Null
            }
        }
    } else {
        failures.push(Failure::new(ns.len(), "power_law_fit", "fit", "fewer than 2 resolved splittings"));
        Value::Null
    };
    Ok(Outcome {
        failures,
        summary: json!({ "kind": "n_sweep", "hold_fixed": s.hold_fixed, "points": points, "fit": fit }),
    })
}

fn s11_map(p: &PhysicalParams, s: &S11MapSpec, dir: &mut RunDir) -> Result<Outcome> {
    let f_c = p.omega_c / TAU;
    let probe = centered_grid(f_c, s.probe_half_span_hz, s.probe_points);
    let spins: Vec<f64> = linspace(s.detuning_start_hz, s.detuning_stop_hz, s.detuning_points)
        .into_iter()
        .map(|d| TAU * (f_c + d))
        .collect();
    let mut failures = Vec::new();
    match avoided_crossing_map(p, &spins, &probe) {
        Ok(map) => {
            let csv = map_csv(&map);
            dir.write("0.csv", "s11_map", csv.as_bytes())?;
            dir.write_json("0.json", "s11_map_axes", &map_axes(&map, &csv))?;
        }
        Err(e) => failures.push(Failure::new(0, "s11_map", "simulation", e)),
    }
    let mut summary = json!({
        "kind": "s11_map",
        "polariton_splitting_hz": polariton_modes(p).splitting() / TAU,
        "cooperativity": p.cooperativity().ok(),
    });
    match s11_spectrum(p, &probe) {
        Ok(spec) => {
            dir.write("1.csv", "s11_spectrum", spectrum_csv(&spec).as_bytes())?;
            let dips = find_dips(&spec);
            summary["dip_separation_hz"] = match dip_separation(&spec) {
                Ok(v) => json!(v),
                Err(e) => {
                    failures.push(Failure::new(1, "s11_spectrum", "analysis", e));
                    Value::Null
                }
            };
            summary["dips"] = dips
                .iter()
                .take(2)
                .map(|d| json!({ "freq_hz": d.freq_hz, "min_abs_s11": d.min_abs_s11, "fwhm_power_hz": d.fwhm_power_hz }))
                .collect();
        }
        Err(e) => failures.push(Failure::new(1, "s11_spectrum", "simulation", e)),
    }
    Ok(Outcome { failures, summary })
}

fn delay_fit(p: &PhysicalParams, s: &DelayFitSpec, dir: &mut RunDir) -> Result<Outcome> {
    let t = &s.timing;
    let mut degrees = vec![s.baseline_theta_deg];
    degrees.extend(s.grid.degrees()?);
    let runs: Vec<Result<SimulationTrace, String>> = degrees
        .par_iter()
        .map(|&d| calibrated_run(p, d, t).map(|r| r.1))
        .collect();
    let mut failures = Vec::new();
    let mut traces = Vec::with_capacity(runs.len());
    for (k, (deg, r)) in degrees.iter().zip(runs).enumerate() {
        match r {
            Ok(tr) => {
                write_trace(dir, &k.to_string(), &tr)?;
                traces.push(Some(tr));
            }
            Err(e) => {
                failures.push(Failure::new(k, format!("theta_deg={deg}"), "simulation", e));
                traces.push(None);
            }
        }
    }
    let Some(baseline) = traces[0].as_ref() else {
        return Ok(Outcome {
            failures,
            summary: json!({ "kind": "delay_fit", "fit": Value::Null }),
        });
    };
    let mut points = Vec::new();
    let mut data = Vec::new();
    for (k, tr) in traces.iter().enumerate().skip(1) {
        let Some(tr) = tr else { continue };
        match delay_time(tr, baseline) {
            Ok(td) => {
                data.push((degrees[k].to_radians(), td));
                points.push(json!({ "index": k, "theta_deg": degrees[k], "delay_s": td }));
            }
            Err(e) => failures.push(Failure::new(k, format!("theta_deg={}", degrees[k]), "analysis", e)),
        }
    }
    let fit = match fit_delay_model(&data) {
        Ok(f) => json!({
            "gamma_per_s": f.values[0],
            "gamma_std_error": f.std_errors[0],
            "t0_s": f.values[1],
            "t0_std_error": f.std_errors[1],
            "r_squared": f.r_squared,
            "converged": f.converged,
        }),
        Err(e) => {
            failures.push(Failure::new(degrees.len(), "delay_model_fit", "fit", e));
            Value::Null
        }
    };
    Ok(Outcome {
        failures,
        summary: json!({ "kind": "delay_fit", "baseline_theta_deg": s.baseline_theta_deg, "points": points, "fit": fit }),
    })
}

fn first_minimum_time(times: &[f64], n: &[f64]) -> Option<f64> {
    (1..n.len().saturating_sub(1))
        .find(|&k| n[k] < n[k - 1] && n[k] <= n[k + 1])
        .map(|k| times[k])
}

fn oracle_compare(p: &PhysicalParams, s: &OracleCompareSpec, dir: &mut RunDir) -> Result<Outcome> {
    let two_s = p.n_spins as usize;
    let alpha = Complex64::new(s.alpha_re, s.alpha_im);
    let mean_n = alpha.norm_sqr();
    let n_max = s
        .n_max
        .unwrap_or_else(|| two_s + (mean_n + 6.0 * (mean_n + 1.0).sqrt()).ceil() as usize + 4);
    let theta = s.theta_deg.to_radians();
    let phi = s.spin_phase_deg.to_radians();
    let fail = |stage: &str, e: String| Outcome {
        failures: vec![Failure::new(0, "oracle_compare", stage, e)],
        summary: json!({ "kind": "oracle_compare" }),
    };

    let mut init = SemiclassicalState::tipped(p.n_spins, theta, phi);
    init.a = alpha;
    let mut mf_params = *p;
    if !s.dissipative {
        mf_params = mf_params.lossless();
    }
    let mf = match simulate(&mf_params, &DriveEnvelope::none(), &init, s.t_total_s, &IntegratorConfig::new(s.output_dt_s)) {
        Ok(tr) => tr,
        Err(e) => return Ok(fail("semiclassical", e.to_string())),
    };

    let quantum = (|| -> Result<ExpectationTrace, String> {
        let basis = DickeFockBasis::new(two_s, n_max).map_err(|e| e.to_string())?;
        let psi = QuantumState::product(
            &basis,
            &QuantumState::spin_coherent_amplitudes(&basis, theta, phi),
            &QuantumState::coherent_amplitudes(&basis, alpha),
        )
        .map_err(|e| e.to_string())?;
        let rates = if s.dissipative { DissipationRates::from_params(p) } else { DissipationRates::none() };
        let state = if rates.is_closed() { psi } else { psi.to_density() };
        let gen = build_tc_generator(&basis, p, 0.0);
        let grid = TimeGrid::new(s.t_total_s, s.output_dt_s).map_err(|e| e.to_string())?;
        evolve_exact(&state, &gen, &rates, &grid, &OracleOptions::default()).map_err(|e| e.to_string())
    })();
    let quantum = match quantum {
        Ok(q) => q,
        Err(e) => return Ok(fail("oracle", e)),
    };
    write_trace(dir, "0", &mf)?;
    dir.write("1.csv", "oracle_expectations", expectation_csv(&quantum).as_bytes())?;

    let n_mf = mf.photon_number();
    let n_q = &quantum.photons;
    let len = n_mf.len().min(n_q.len());
    let n_scale = n_q.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let n_dev = (0..len).map(|k| (n_mf[k] - n_q[k]).abs()).fold(0.0, f64::max) / n_scale;
    let spin = 0.5 * p.n_spins;
    let z_dev = (0..len).map(|k| (mf.s_z[k] - quantum.s_z[k]).abs()).fold(0.0, f64::max) / spin;
    Ok(Outcome {
        failures: Vec::new(),
        summary: json!({
            "kind": "oracle_compare",
            "n_spins": two_s,
            "n_max": n_max,
            "dissipative": s.dissipative,
            "max_photon_deviation_rel": n_dev,
            "max_sz_deviation_rel": z_dev,
            "first_photon_minimum_s": {
                "semiclassical": first_minimum_time(&mf.times, &n_mf),
                "oracle": first_minimum_time(&quantum.times, n_q),
            },
            "max_boundary_population": quantum.max_boundary_population,
        }),
    })
}
