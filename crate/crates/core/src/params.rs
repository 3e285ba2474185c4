//! Physical parameters of the coupled spin-ensemble / cavity system.
//!
//! Internally every frequency and rate is angular (rad/s). Values read from
//! or written to files are ordinary frequencies (Hz); the conversion happens
//! only in [`ParamsHz`].

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the built-in calibration preset.
pub const PAPER_2016: &str = "paper-2016";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter `{field}` must be finite and non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("parameter `{field}` must be finite and strictly positive, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("cooperativity undefined: {0} is zero")]
    ZeroRate(&'static str),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

/// Parameter set of the Tavis-Cummings system with losses.
///
/// All fields are angular frequencies in rad/s except `n_spins`, which is the
/// net polarization `N = N_up - N_down` and is allowed to be non-integer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub omega_c: f64,
    pub omega_s: f64,
    pub coupling_g: f64,
    pub n_spins: f64,
    pub kappa_int: f64,
    pub kappa_ext: f64,
    pub gamma: f64,
    pub omega_frame: f64,
}

/// Regime classification returned by [`PhysicalParams::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    /// `2 g sqrt(N) > kappa + gamma`.
    pub strong_coupling: bool,
    /// Cooperativity above one.
    pub high_cooperativity: bool,
}

impl PhysicalParams {
    /// The `paper-2016` calibration: N = 3.6e13, splitting 2G/2π = 580 kHz,
    /// κ/2π = 60 kHz split evenly, γ/2π = 18 kHz, resonant at 9.6 GHz.
    pub fn paper_2016() -> Self {
        ParamsHz::paper_2016().to_angular()
    }

    pub fn preset(name: &str) -> Result<Self, ParamError> {
        match name {
            PAPER_2016 => Ok(Self::paper_2016()),
            other => Err(ParamError::UnknownPreset(other.to_string())),
        }
    }

    /// Checks field ranges and classifies the coupling regime.
    ///
    /// Weak coupling is not an error; only malformed values are rejected.
    pub fn validate(&self) -> Result<RegimeFlags, ParamError> {
        let non_negative = [
            ("omega_c", self.omega_c),
            ("omega_s", self.omega_s),
            ("coupling_g", self.coupling_g),
            ("kappa_int", self.kappa_int),
            ("kappa_ext", self.kappa_ext),
            ("gamma", self.gamma),
            ("omega_frame", self.omega_frame),
        ];
        for (field, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ParamError::Negative { field, value });
            }
        }
        if !(self.n_spins.is_finite() && self.n_spins > 0.0) {
            return Err(ParamError::NotPositive {
                field: "n_spins",
                value: self.n_spins,
            });
        }
        let strong_coupling = self.rabi_splitting() > self.kappa_total() + self.gamma;
        let high_cooperativity = match self.cooperativity() {
            Ok(c) => c > 1.0,
            // a lossless channel makes C unbounded
            Err(_) => self.collective_coupling() > 0.0,
        };
        Ok(RegimeFlags {
            strong_coupling,
            high_cooperativity,
        })
    }

    pub fn kappa_total(&self) -> f64 {
        self.kappa_int + self.kappa_ext
    }

    /// Collective coupling `G = g sqrt(N)`.
    pub fn collective_coupling(&self) -> f64 {
        self.coupling_g * self.n_spins.sqrt()
    }

    /// Vacuum Rabi splitting `2 g sqrt(N)` in rad/s.
    pub fn rabi_splitting(&self) -> f64 {
        2.0 * self.collective_coupling()
    }

    /// `C = g² N / (κ γ)`.
    pub fn cooperativity(&self) -> Result<f64, ParamError> {
        let kappa = self.kappa_total();
        if kappa == 0.0 {
            return Err(ParamError::ZeroRate("kappa_total"));
        }
        if self.gamma == 0.0 {
            return Err(ParamError::ZeroRate("gamma"));
        }
        Ok(self.coupling_g * self.coupling_g * self.n_spins / (kappa * self.gamma))
    }

    /// Cavity detuning from the rotating frame.
    pub fn cavity_detuning(&self) -> f64 {
        self.omega_c - self.omega_frame
    }

    /// Spin detuning from the rotating frame.
    pub fn spin_detuning(&self) -> f64 {
        self.omega_s - self.omega_frame
    }

    /// Same system with a different spin count at fixed single-spin coupling.
    pub fn with_n_spins(mut self, n_spins: f64) -> Self {
        self.n_spins = n_spins;
        self
    }

    /// Same collective coupling `G`, redistributed over `n_spins`.
    pub fn with_n_spins_fixed_collective(mut self, n_spins: f64) -> Self {
        let big_g = self.collective_coupling();
        self.n_spins = n_spins;
        self.coupling_g = big_g / n_spins.sqrt();
        self
    }

    /// Closed system: all loss rates set to zero.
    pub fn lossless(mut self) -> Self {
        self.kappa_int = 0.0;
        self.kappa_ext = 0.0;
        self.gamma = 0.0;
        self
    }

    pub fn to_hz(&self) -> ParamsHz {
        ParamsHz {
            cavity_freq_hz: self.omega_c / TAU,
            spin_freq_hz: self.omega_s / TAU,
            coupling_hz: self.coupling_g / TAU,
            n_spins: self.n_spins,
            kappa_int_hz: self.kappa_int / TAU,
            kappa_ext_hz: self.kappa_ext / TAU,
            gamma_hz: self.gamma / TAU,
            frame_freq_hz: self.omega_frame / TAU,
        }
    }
}

/// Dephasing rate in Hz from an inhomogeneous dephasing time, `1 / (2π T2*)`.
pub fn gamma_hz_from_t2_star(t2_star: f64) -> f64 {
    1.0 / (TAU * t2_star)
}

/// File-facing mirror of [`PhysicalParams`] in ordinary frequency units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsHz {
    pub cavity_freq_hz: f64,
    pub spin_freq_hz: f64,
    pub coupling_hz: f64,
    pub n_spins: f64,
    pub kappa_int_hz: f64,
    pub kappa_ext_hz: f64,
    pub gamma_hz: f64,
    pub frame_freq_hz: f64,
}

impl ParamsHz {
    pub fn paper_2016() -> Self {
        let n_spins = 3.6e13;
        let splitting_hz = 580e3;
        let kappa_hz = 60e3;
        let cavity = 9.6e9;
        Self {
            cavity_freq_hz: cavity,
            spin_freq_hz: cavity,
            coupling_hz: splitting_hz / (2.0 * f64::sqrt(n_spins)),
            n_spins,
            kappa_int_hz: 0.5 * kappa_hz,
            kappa_ext_hz: 0.5 * kappa_hz,
            gamma_hz: 18e3,
            frame_freq_hz: cavity,
        }
    }

    pub fn to_angular(&self) -> PhysicalParams {
        PhysicalParams {
            omega_c: TAU * self.cavity_freq_hz,
            omega_s: TAU * self.spin_freq_hz,
            coupling_g: TAU * self.coupling_hz,
            n_spins: self.n_spins,
            kappa_int: TAU * self.kappa_int_hz,
            kappa_ext: TAU * self.kappa_ext_hz,
            gamma: TAU * self.gamma_hz,
            omega_frame: TAU * self.frame_freq_hz,
        }
    }
}

/// One row of a preset table.
#[derive(Debug, Clone, Serialize)]
pub struct PresetEntry {
    pub name: &'static str,
    pub value: f64,
    pub unit: &'static str,
    pub provenance: &'static str,
}

/// Parameter table with provenance notes for `presets` listings.
pub fn preset_table(name: &str) -> Result<Vec<PresetEntry>, ParamError> {
    if name != PAPER_2016 {
        return Err(ParamError::UnknownPreset(name.to_string()));
    }
    let p = ParamsHz::paper_2016();
    let g_sqrt_n = p.coupling_hz * p.n_spins.sqrt();
    Ok(vec![
        PresetEntry {
            name: "n_spins",
            value: p.n_spins,
            unit: "spins",
            provenance: "reported net polarization at resonant optical pumping",
        },
        PresetEntry {
            name: "splitting_hz (2 g sqrt(N))",
            value: 2.0 * g_sqrt_n,
            unit: "Hz",
            provenance: "reported vacuum Rabi splitting; treated as primary",
        },
        PresetEntry {
            name: "coupling_hz (g)",
            value: p.coupling_hz,
            unit: "Hz",
            provenance: "derived from splitting / (2 sqrt(N)); reported 37-38 mHz is inconsistent",
        },
        PresetEntry {
            name: "kappa_hz (kappa_int + kappa_ext)",
            value: p.kappa_int_hz + p.kappa_ext_hz,
            unit: "Hz",
            provenance: "reported cavity loss for Q = 75,000",
        },
        PresetEntry {
            name: "kappa_ext_hz",
            value: p.kappa_ext_hz,
            unit: "Hz",
            provenance: "assumed even internal/external split",
        },
        PresetEntry {
            name: "gamma_hz",
            value: p.gamma_hz,
            unit: "Hz",
            provenance: "reported spin dephasing (T2* = 9 us)",
        },
        PresetEntry {
            name: "cavity_freq_hz",
            value: p.cavity_freq_hz,
            unit: "Hz",
            provenance: "X-band resonator frequency",
        },
        PresetEntry {
            name: "spin_freq_hz",
            value: p.spin_freq_hz,
            unit: "Hz",
            provenance: "tuned into resonance",
        },
        PresetEntry {
            name: "frame_freq_hz",
            value: p.frame_freq_hz,
            unit: "Hz",
            provenance: "rotating frame at the cavity frequency",
        },
    ])
}
