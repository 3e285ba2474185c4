//! CSV and JSON serialization of traces, spectra, maps and fits. Numbers are
//! written with Rust's shortest round-trip `{:e}` formatting so identical
//! inputs produce identical bytes.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::{FftSpectrum, Window};
use crate::integrator::IntegratorConfig;
use crate::oracle::ExpectationTrace;
use crate::params::ParamsHz;
use crate::semiclassical::SimulationTrace;
use crate::spectroscopy::{CrossingMap, Spectrum};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub const TRACE_COLUMNS: [&str; 8] = ["t_s", "re_a", "im_a", "abs_a", "n", "re_sminus", "im_sminus", "s_z"];

/// SHA-256 over `"blob <len>\0" ++ bytes`, hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v:e}");
    }
    out.push('\n');
}

pub fn trace_csv(trace: &SimulationTrace) -> String {
    let mut out = String::with_capacity(trace.len() * 160);
    out.push_str(&TRACE_COLUMNS.join(","));
    out.push('\n');
    for k in 0..trace.len() {
        let a = trace.a[k];
        let s = trace.s_minus[k];
        push_row(&mut out, &[trace.times[k], a.re, a.im, a.norm(), a.norm_sqr(), s.re, s.im, trace.s_z[k]]);
    }
    out
}

/// Drive segment in file units: amplitude as `V / 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSegmentHz {
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub amplitude_hz: f64,
    pub phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub columns: Vec<String>,
    pub n_samples: usize,
    pub params: ParamsHz,
    pub drive: Vec<DriveSegmentHz>,
    pub integrator: Option<IntegratorConfig>,
    pub dead_time_s: f64,
    pub oracle: bool,
    /// Content hash of the CSV payload.
    pub content_hash: String,
}

pub fn trace_metadata(trace: &SimulationTrace, csv: &str) -> TraceMetadata {
    TraceMetadata {
        columns: TRACE_COLUMNS.iter().map(|s| s.to_string()).collect(),
        n_samples: trace.len(),
        params: trace.params.to_hz(),
        drive: trace
            .drive
            .segments()
            .iter()
            .map(|s| DriveSegmentHz {
                t_start_s: s.t_start,
                t_end_s: s.t_end,
                amplitude_hz: s.amplitude / TAU,
                phase_rad: s.phase,
            })
            .collect(),
        integrator: trace.integrator,
        dead_time_s: trace.dead_time,
        oracle: trace.oracle,
        content_hash: content_hash(csv.as_bytes()),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| IoError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `path` (CSV) and `path` with a `.json` extension (metadata).
/// Returns the metadata.
pub fn write_trace(path: &Path, trace: &SimulationTrace) -> Result<TraceMetadata, IoError> {
    let csv = trace_csv(trace);
    let meta = trace_metadata(trace, &csv);
    write_file(path, csv.as_bytes())?;
    write_file(&path.with_extension("json"), serde_json::to_string_pretty(&meta)?.as_bytes())?;
    Ok(meta)
}

/// Columns of a trace CSV parsed back into numbers.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or(IoError::Parse {
            line: 1,
            message: "empty file".into(),
        })?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let row = row.map_err(|e| IoError::Parse {
            line: i + 2,
            message: e.to_string(),
        })?;
        if row.len() != header.len() {
            return Err(IoError::Parse {
                line: i + 2,
                message: format!("expected {} fields, got {}", header.len(), row.len()),
            });
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = String::from("freq_hz,re_s11,im_s11,abs_s11\n");
    for (f, s) in spectrum.freq_hz.iter().zip(&spectrum.s11) {
        push_row(&mut out, &[*f, s.re, s.im, s.norm()]);
    }
    out
}

pub const EXPECTATION_COLUMNS: [&str; 10] = [
    "t_s",
    "re_a",
    "im_a",
    "n",
    "re_sminus",
    "im_sminus",
    "s_z",
    "s_plus_s_minus",
    "trace",
    "excitation",
];

/// Oracle expectation values. Unlike [`trace_csv`], `n` is `<a† a>`.
#[allow(clippy::needless_range_loop)]
pub fn expectation_csv(trace: &ExpectationTrace) -> String {
    let mut out = String::with_capacity(trace.times.len() * 200);
    out.push_str(&EXPECTATION_COLUMNS.join(","));
    out.push('\n');
    let excitation = trace.excitation();
    for k in 0..trace.times.len() {
        let (a, s) = (trace.a[k], trace.s_minus[k]);
        push_row(
            &mut out,
            &[
                trace.times[k],
                a.re,
                a.im,
                trace.photons[k],
                s.re,
                s.im,
                trace.s_z[k],
                trace.s_plus_s_minus[k],
                trace.trace_norm[k],
                excitation[k],
            ],
        );
    }
    out
}

pub fn fft_csv(spectrum: &FftSpectrum) -> String {
    let mut out = String::from("freq_hz,magnitude\n");
    for (f, m) in spectrum.freq_hz.iter().zip(spectrum.magnitude()) {
        push_row(&mut out, &[*f, m]);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FftMetadata {
    pub window: Window,
    pub zero_pad: usize,
    pub n_samples: usize,
    pub dt_s: f64,
    pub t_start_s: f64,
    pub content_hash: String,
}

pub fn fft_metadata(spectrum: &FftSpectrum, csv: &str) -> FftMetadata {
    FftMetadata {
        window: spectrum.window,
        zero_pad: spectrum.zero_pad,
        n_samples: spectrum.n_samples,
        dt_s: spectrum.dt,
        t_start_s: spectrum.t_start,
        content_hash: content_hash(csv.as_bytes()),
    }
}

/// `|S11|` matrix, one row per spin frequency, no header.
pub fn map_csv(map: &CrossingMap) -> String {
    let mut out = String::new();
    for row in &map.abs_s11 {
        push_row(&mut out, row);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapAxes {
    /// Row axis.
    pub spin_freq_hz: Vec<f64>,
    /// Column axis.
    pub freq_hz: Vec<f64>,
    pub content_hash: String,
}

pub fn map_axes(map: &CrossingMap, csv: &str) -> MapAxes {
    MapAxes {
        spin_freq_hz: map.omega_s.iter().map(|w| w / TAU).collect(),
        freq_hz: map.freq_hz.clone(),
        content_hash: content_hash(csv.as_bytes()),
    }
}
