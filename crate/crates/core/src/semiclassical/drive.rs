//! Piecewise-constant complex drive `V(t)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DriveError {
    #[error("segment {index}: need t_end > t_start, got [{t_start:e}, {t_end:e}]")]
    EmptySegment { index: usize, t_start: f64, t_end: f64 },
    #[error("segment {index}: amplitude must be finite and >= 0, got {amplitude:e}")]
    BadAmplitude { index: usize, amplitude: f64 },
    #[error("segment {index} overlaps or precedes segment {}", index - 1)]
    Unordered { index: usize },
}

/// `V(t) = amplitude * exp(i phase)` on `[t_start, t_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSegment {
    pub t_start: f64,
    pub t_end: f64,
    /// rad/s * sqrt(photons)
    pub amplitude: f64,
    pub phase: f64,
}

impl DriveSegment {
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// Ordered, non-overlapping segments; zero elsewhere.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DriveEnvelope {
    segments: Vec<DriveSegment>,
}

impl DriveEnvelope {
    pub fn new(segments: Vec<DriveSegment>) -> Result<Self, DriveError> {
        for (index, s) in segments.iter().enumerate() {
            if !(s.t_end > s.t_start) || !s.t_start.is_finite() || !s.t_end.is_finite() {
                return Err(DriveError::EmptySegment {
                    index,
                    t_start: s.t_start,
                    t_end: s.t_end,
                });
            }
            if !(s.amplitude >= 0.0 && s.amplitude.is_finite()) {
                return Err(DriveError::BadAmplitude {
                    index,
                    amplitude: s.amplitude,
                });
            }
            if index > 0 && s.t_start < segments[index - 1].t_end {
                return Err(DriveError::Unordered { index });
            }
        }
        Ok(Self { segments })
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// Single pulse on `[0, duration)`.
    pub fn rectangular(amplitude: f64, duration: f64, phase: f64) -> Result<Self, DriveError> {
        Self::new(vec![DriveSegment {
            t_start: 0.0,
            t_end: duration,
            amplitude,
            phase,
        }])
    }

    pub fn segments(&self) -> &[DriveSegment] {
        &self.segments
    }

    pub fn value_at(&self, t: f64) -> Complex64 {
        // few segments; linear scan is cheapest
        for s in &self.segments {
            if t < s.t_start {
                break;
            }
            if t < s.t_end {
                return s.value();
            }
        }
        Complex64::default()
    }

    /// All segment edges, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segments.iter().flat_map(|s| [s.t_start, s.t_end]).collect();
        v.dedup();
        v
    }

    /// End of the last segment, or 0 for an empty envelope.
    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    /// Phase of the first segment with non-zero amplitude.
    pub fn reference_phase(&self) -> Option<f64> {
        self.segments.iter().find(|s| s.amplitude > 0.0).map(|s| s.phase)
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(|s| s.amplitude == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.segments {
            s.amplitude *= factor;
        }
        out
    }

    pub fn phase_shifted(&self, dphi: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.segments {
            s.phase += dphi;
        }
        out
    }
}
