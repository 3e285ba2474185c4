//! Spectra of the cavity field in the rotating frame.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::semiclassical::SimulationTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    Hann,
}

impl Window {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Self::Rectangular => vec![1.0; n],
            Self::Hann if n < 2 => vec![1.0; n],
            Self::Hann => (0..n).map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / (n - 1) as f64).cos())).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FftOptions {
    pub window: Window,
    pub skip_dead_time: bool,
    /// Transform length as a multiple of the sample count.
    pub zero_pad: usize,
}

impl Default for FftOptions {
    fn default() -> Self {
        Self {
            window: Window::Rectangular,
            skip_dead_time: true,
            zero_pad: 8,
        }
    }
}

/// Two-sided spectrum `X(f) = dt * sum_k w_k x_k e^{-2 pi i f t_k}` on
/// ascending frequency offsets, so that `sum |x|^2 dt = sum |X|^2 df`.
#[derive(Debug, Clone, PartialEq)]
pub struct FftSpectrum {
    pub freq_hz: Vec<f64>,
    pub spectrum: Vec<Complex64>,
    pub window: Window,
    pub zero_pad: usize,
    /// Samples transformed before padding.
    pub n_samples: usize,
    pub dt: f64,
    pub t_start: f64,
}

impl FftSpectrum {
    pub fn magnitude(&self) -> Vec<f64> {
        self.spectrum.iter().map(|x| x.norm()).collect()
    }

    pub fn df(&self) -> f64 {
        1.0 / (self.spectrum.len() as f64 * self.dt)
    }

    /// Windowed input samples recovered by the inverse transform.
    pub fn inverse(&self) -> Vec<Complex64> {
        let n = self.spectrum.len();
        let h = n.div_ceil(2);
        // undo the ascending-frequency ordering
        let mut buf: Vec<Complex64> = (0..n).map(|k| self.spectrum[(k + n - h) % n] / self.dt).collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf.truncate(self.n_samples);
        buf.iter().map(|x| x / n as f64).collect()
    }
}

fn check_uniform(times: &[f64]) -> Result<f64, AnalysisError> {
    if times.len() < 2 {
        return Err(AnalysisError::TooFewSamples {
            needed: 2,
            have: times.len(),
        });
    }
    let dt = times[1] - times[0];
    for (i, w) in times.windows(2).enumerate() {
        if !(((w[1] - w[0]) - dt).abs() <= 1e-6 * dt) {
            return Err(AnalysisError::NonUniformGrid { index: i + 1 });
        }
    }
    Ok(dt)
}

/// Spectrum of an arbitrary uniformly sampled complex series.
pub fn fft_series(times: &[f64], values: &[Complex64], window: Window, zero_pad: usize) -> Result<FftSpectrum, AnalysisError> {
    let dt = check_uniform(times)?;
    let n = values.len();
    let pad = zero_pad.max(1);
    let n_fft = n * pad;
    let w = window.weights(n);
    let mut buf = vec![Complex64::default(); n_fft];
    for k in 0..n {
        buf[k] = values[k] * w[k];
    }
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
    let h = n_fft.div_ceil(2);
    let df = 1.0 / (n_fft as f64 * dt);
    let mut freq_hz = Vec::with_capacity(n_fft);
    let mut spectrum = Vec::with_capacity(n_fft);
    for k in (h..n_fft).chain(0..h) {
        let idx = if k < h { k as f64 } else { k as f64 - n_fft as f64 };
        freq_hz.push(idx * df);
        spectrum.push(buf[k] * dt);
    }
    Ok(FftSpectrum {
        freq_hz,
        spectrum,
        window,
        zero_pad: pad,
        n_samples: n,
        dt,
        t_start: times[0],
    })
}

pub fn fid_fft(trace: &SimulationTrace, window: Window, skip_dead_time: bool) -> Result<FftSpectrum, AnalysisError> {
    fid_fft_with(
        trace,
        &FftOptions {
            window,
            skip_dead_time,
            ..Default::default()
        },
    )
}

pub fn fid_fft_with(trace: &SimulationTrace, opts: &FftOptions) -> Result<FftSpectrum, AnalysisError> {
    let start = if opts.skip_dead_time {
        trace.index_at(trace.analysis_start())
    } else {
        0
    };
    fft_series(&trace.times[start..], &trace.a[start..], opts.window, opts.zero_pad)
}

struct Peak {
    index: usize,
    prominence: f64,
}

/// Local maxima at least `min_height` tall, with their topographic prominence.
fn peaks_with_prominence(y: &[f64], min_height: f64) -> Vec<Peak> {
    let n = y.len();
    let mut out = Vec::new();
    for k in 1..n.saturating_sub(1) {
        // prominence never exceeds height, so short peaks are skipped early
        if !(y[k] > y[k - 1] && y[k] >= y[k + 1]) || y[k] < min_height {
            continue;
        }
        let mut left_min = y[k];
        let mut j = k;
        while j > 0 {
            j -= 1;
            if y[j] > y[k] {
                break;
            }
            left_min = left_min.min(y[j]);
        }
        let mut right_min = y[k];
        let mut j = k;
        while j + 1 < n {
            j += 1;
            if y[j] > y[k] {
                break;
            }
            right_min = right_min.min(y[j]);
        }
        out.push(Peak {
            index: k,
            prominence: y[k] - left_min.max(right_min),
        });
    }
    out
}

/// Default prominence threshold relative to the global maximum; above the
/// first side lobe of a rectangular window (about 0.22).
pub const DEFAULT_MIN_PROMINENCE: f64 = 0.25;

pub fn peak_separation(spectrum: &FftSpectrum) -> Result<f64, AnalysisError> {
    peak_separation_with(spectrum, DEFAULT_MIN_PROMINENCE)
}

/// Distance in Hz between the two most prominent peaks of `|X|`, each
/// refined by a three-point parabola.
pub fn peak_separation_with(spectrum: &FftSpectrum, min_relative_prominence: f64) -> Result<f64, AnalysisError> {
    let y = spectrum.magnitude();
    let top = y.iter().copied().fold(0.0, f64::max);
    let threshold = min_relative_prominence * top;
    let mut peaks: Vec<Peak> = peaks_with_prominence(&y, threshold)
        .into_iter()
        .filter(|p| top > 0.0 && p.prominence >= threshold)
        .collect();
    if peaks.len() < 2 {
        return Err(AnalysisError::FewerThanTwoPeaks { found: peaks.len() });
    }
    peaks.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));
    let df = spectrum.df();
    let refine = |k: usize| {
        let d = crate::semiclassical::tipping::parabolic_offset(y[k - 1], y[k], y[k + 1]);
        spectrum.freq_hz[k] + d * df
    };
    Ok((refine(peaks[0].index) - refine(peaks[1].index)).abs())
}

/// Frequency of the largest `|X|`, parabola-refined.
pub fn dominant_frequency(spectrum: &FftSpectrum) -> f64 {
    let y = spectrum.magnitude();
    let k = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap_or(0);
    if k == 0 || k + 1 >= y.len() {
        return spectrum.freq_hz[k];
    }
    let d = crate::semiclassical::tipping::parabolic_offset(y[k - 1], y[k], y[k + 1]);
    spectrum.freq_hz[k] + d * spectrum.df()
}
