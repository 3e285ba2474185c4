//! Semiclassical expectation values and their Bloch-sphere picture.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("Bloch coordinates undefined for a zero-length pseudospin")]
pub struct ZeroRadius;

/// `(⟨a⟩, ⟨S_-⟩, ⟨S_z⟩)` in physical units: sqrt(photons) and spins.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SemiclassicalState {
    pub a: Complex64,
    pub s_minus: Complex64,
    pub s_z: f64,
}

impl SemiclassicalState {
    pub fn new(a: Complex64, s_minus: Complex64, s_z: f64) -> Self {
        Self { a, s_minus, s_z }
    }

    /// Empty cavity, all spins down.
    pub fn ground(n_spins: f64) -> Self {
        Self::new(Complex64::default(), Complex64::default(), -0.5 * n_spins)
    }

    /// Empty cavity with the pseudospin of length `N/2` tipped to polar angle
    /// `theta` (from the south pole) and azimuth `phi`.
    pub fn tipped(n_spins: f64, theta: f64, phi: f64) -> Self {
        let r = 0.5 * n_spins;
        Self::new(
            Complex64::default(),
            Complex64::from_polar(r * theta.sin(), phi),
            -r * theta.cos(),
        )
    }

    pub fn photon_number(&self) -> f64 {
        self.a.norm_sqr()
    }

    pub fn bloch_radius(&self) -> f64 {
        self.s_minus.norm().hypot(self.s_z)
    }

    pub fn bloch(&self) -> Result<BlochCoordinates, ZeroRadius> {
        BlochCoordinates::from_state(self)
    }

    /// Interleaved `[re a, im a, re s-, im s-, s_z]`.
    pub fn to_array(&self) -> [f64; 5] {
        [self.a.re, self.a.im, self.s_minus.re, self.s_minus.im, self.s_z]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        Self::new(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]), y[4])
    }
}

/// Polar angle is measured from the ground state `|S, -S⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochCoordinates {
    pub polar_theta: f64,
    pub azimuth_phi: f64,
    pub radius: f64,
}

impl BlochCoordinates {
    pub fn from_state(state: &SemiclassicalState) -> Result<Self, ZeroRadius> {
        let radius = state.bloch_radius();
        if !(radius > 0.0) {
            return Err(ZeroRadius);
        }
        // atan2 keeps full precision next to the poles, where arccos(-s_z/R) does not
        let polar_theta = state.s_minus.norm().atan2(-state.s_z).clamp(0.0, PI);
        Ok(Self {
            polar_theta,
            azimuth_phi: state.s_minus.arg(),
            radius,
        })
    }
}
