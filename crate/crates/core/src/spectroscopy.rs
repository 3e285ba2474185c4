//! Linear-response reflection spectroscopy of the coupled system.
//!
//! With `S_z` frozen at `-N/2` the single-port reflection coefficient is
//! `S11(w) = 1 - 2 k_ext / [i(w_c - w) + k + G^2 / (i(w_s - w) + gamma)]`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{ParamError, PhysicalParams};

/// Bohr magneton, J/T (CODATA 2018).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Reduced Planck constant, J s (exact).
pub const HBAR: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectroscopyError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("empty {0} grid")]
    EmptyGrid(&'static str),
    #[error("non-finite value in {0} grid")]
    NonFiniteGrid(&'static str),
    #[error("expected two dips, found {0}")]
    TooFewDips(usize),
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Complex angular eigenfrequencies `w - i * half_width`, sorted by real part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritonPair {
    pub lower: Complex64,
    pub upper: Complex64,
}

impl PolaritonPair {
    /// Real-part splitting, rad/s.
    pub fn splitting(&self) -> f64 {
        self.upper.re - self.lower.re
    }
}

/// Eigenvalues of `[[w_c - i k, G], [G, w_s - i gamma]]`.
pub fn polariton_modes(params: &PhysicalParams) -> PolaritonPair {
    let a = Complex64::new(params.omega_c, -params.kappa_total());
    let d = Complex64::new(params.omega_s, -params.gamma);
    let big_g = params.collective_coupling();
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let q = (half * half + big_g * big_g).sqrt();
    let (x, y) = (mean - q, mean + q);
    if x.re <= y.re {
        PolaritonPair { lower: x, upper: y }
    } else {
        PolaritonPair { lower: y, upper: x }
    }
}

/// Reflection spectrum on a laboratory-frame frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freq_hz: Vec<f64>,
    pub s11: Vec<Complex64>,
    pub params: PhysicalParams,
}

impl Spectrum {
    pub fn abs_s11(&self) -> Vec<f64> {
        self.s11.iter().map(|s| s.norm()).collect()
    }
}

fn check_grid(grid: &[f64], name: &'static str) -> Result<(), SpectroscopyError> {
    if grid.is_empty() {
        return Err(SpectroscopyError::EmptyGrid(name));
    }
    if grid.iter().any(|f| !f.is_finite()) {
        return Err(SpectroscopyError::NonFiniteGrid(name));
    }
    Ok(())
}

fn s11_at(params: &PhysicalParams, omega_s: f64, omega: f64) -> Complex64 {
    let big_g2 = params.collective_coupling().powi(2);
    let spin = I * (omega_s - omega) + params.gamma;
    let mut z = I * (params.omega_c - omega) + params.kappa_total();
    if big_g2 > 0.0 {
        if spin.norm_sqr() == 0.0 {
            // lossless spins exactly on resonance reflect everything
            return Complex64::new(1.0, 0.0);
        }
        z += big_g2 / spin;
    }
    if z.norm_sqr() == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    1.0 - 2.0 * params.kappa_ext / z
}

pub fn s11_spectrum(params: &PhysicalParams, freq_grid_hz: &[f64]) -> Result<Spectrum, SpectroscopyError> {
    params.validate()?;
    check_grid(freq_grid_hz, "frequency")?;
    let s11 = freq_grid_hz.iter().map(|&f| s11_at(params, params.omega_s, TAU * f)).collect();
    Ok(Spectrum {
        freq_hz: freq_grid_hz.to_vec(),
        s11,
        params: *params,
    })
}

/// `|S11|` with one row per spin frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingMap {
    pub omega_s: Vec<f64>,
    pub freq_hz: Vec<f64>,
    pub abs_s11: Vec<Vec<f64>>,
}

pub fn avoided_crossing_map(
    params: &PhysicalParams,
    omega_s_grid: &[f64],
    freq_grid_hz: &[f64],
) -> Result<CrossingMap, SpectroscopyError> {
    params.validate()?;
    check_grid(omega_s_grid, "spin frequency")?;
    check_grid(freq_grid_hz, "frequency")?;
    let abs_s11 = omega_s_grid
        .par_iter()
        .map(|&ws| freq_grid_hz.iter().map(|&f| s11_at(params, ws, TAU * f).norm()).collect())
        .collect();
    Ok(CrossingMap {
        omega_s: omega_s_grid.to_vec(),
        freq_hz: freq_grid_hz.to_vec(),
        abs_s11,
    })
}

/// Zeeman angular frequency `g_e mu_B B / hbar`, rad/s.
pub fn spin_frequency_from_field(g_factor: f64, field_tesla: f64) -> f64 {
    g_factor * BOHR_MAGNETON * field_tesla / HBAR
}

pub fn field_from_spin_frequency(g_factor: f64, omega_s: f64) -> f64 {
    omega_s * HBAR / (g_factor * BOHR_MAGNETON)
}

/// A local minimum of `|S11|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dip {
    /// Parabola-refined position, Hz.
    pub freq_hz: f64,
    pub min_abs_s11: f64,
    /// Full width at half depth of `1 - |S11|^2`, Hz; `None` if the dip is
    /// not resolved on both sides within the grid.
    pub fwhm_power_hz: Option<f64>,
}

/// All interior local minima of `|S11|`, deepest first.
pub fn find_dips(spectrum: &Spectrum) -> Vec<Dip> {
    let f = &spectrum.freq_hz;
    let p: Vec<f64> = spectrum.s11.iter().map(|s| s.norm_sqr()).collect();
    let mut dips = Vec::new();
    for k in 1..p.len().saturating_sub(1) {
        if !(p[k] < p[k - 1] && p[k] <= p[k + 1]) {
            continue;
        }
        let den = p[k - 1] - 2.0 * p[k] + p[k + 1];
        let d = if den > 0.0 { (0.5 * (p[k - 1] - p[k + 1]) / den).clamp(-0.5, 0.5) } else { 0.0 };
        let step = if d >= 0.0 { f[k + 1] - f[k] } else { f[k] - f[k - 1] };
        let freq = f[k] + d * step;
        let half = 1.0 - 0.5 * (1.0 - p[k]);
        let left = (1..=k).rev().find(|&j| p[j - 1] >= half).map(|j| {
            let (x0, x1, y0, y1) = (f[j - 1], f[j], p[j - 1], p[j]);
            x0 + (half - y0) * (x1 - x0) / (y1 - y0)
        });
        let right = (k..p.len() - 1).find(|&j| p[j + 1] >= half).map(|j| {
            let (x0, x1, y0, y1) = (f[j], f[j + 1], p[j], p[j + 1]);
            x0 + (half - y0) * (x1 - x0) / (y1 - y0)
        });
        dips.push(Dip {
            freq_hz: freq,
            min_abs_s11: p[k].sqrt(),
            fwhm_power_hz: left.zip(right).map(|(l, r)| r - l),
        });
    }
    dips.sort_by(|a, b| a.min_abs_s11.total_cmp(&b.min_abs_s11));
    dips
}

/// Separation of the two deepest dips, Hz.
pub fn dip_separation(spectrum: &Spectrum) -> Result<f64, SpectroscopyError> {
    let dips = find_dips(spectrum);
    if dips.len() < 2 {
        return Err(SpectroscopyError::TooFewDips(dips.len()));
    }
    Ok((dips[0].freq_hz - dips[1].freq_hz).abs())
}

/// Uniform grid of `points` frequencies centred on `center_hz`.
pub fn centered_grid(center_hz: f64, half_span_hz: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![center_hz];
    }
    let step = 2.0 * half_span_hz / (points - 1) as f64;
    (0..points).map(|k| center_hz - half_span_hz + k as f64 * step).collect()
}
