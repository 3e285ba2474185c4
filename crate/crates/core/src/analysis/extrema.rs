//! Prominence-filtered extrema of real series.

use serde::{Deserialize, Serialize};

use crate::semiclassical::tipping::parabolic_offset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub index: usize,
    pub t: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

fn refined(times: &[f64], y: &[f64], k: usize, kind: ExtremumKind) -> Extremum {
    if k == 0 || k + 1 >= y.len() {
        return Extremum {
            index: k,
            t: times[k],
            value: y[k],
            kind,
        };
    }
    let d = parabolic_offset(y[k - 1], y[k], y[k + 1]);
    let step = if d >= 0.0 { times[k + 1] - times[k] } else { times[k] - times[k - 1] };
    Extremum {
        index: k,
        t: times[k] + d * step,
        value: y[k] - 0.25 * (y[k - 1] - y[k + 1]) * d,
        kind,
    }
}

enum Phase {
    Unknown { hi: usize, lo: usize },
    SeekMin(usize),
    SeekMax(usize),
}

/// Alternating extrema whose swing to the next confirmed extremum is at
/// least `min_prominence * (max - min)`.
///
/// The first sample is reported as an extremum once the series has moved
/// far enough away from it; the trailing unconfirmed candidate is dropped.
pub fn extract_extrema(times: &[f64], y: &[f64], min_prominence: f64) -> Vec<Extremum> {
    if y.len() < 5 || times.len() != y.len() {
        return Vec::new();
    }
    let (lo_v, hi_v) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let h = min_prominence.max(0.0) * (hi_v - lo_v);
    let moved = |from: f64, to: f64| to - from >= h && to != from;
    let mut out = Vec::new();
    let mut phase = Phase::Unknown { hi: 0, lo: 0 };
    for k in 1..y.len() {
        phase = match phase {
            Phase::Unknown { mut hi, mut lo } => {
                if y[k] > y[hi] {
                    hi = k;
                }
                if y[k] < y[lo] {
                    lo = k;
                }
                if moved(y[k], y[hi]) && hi < k && y[k] < y[hi] {
                    out.push(refined(times, y, hi, ExtremumKind::Maximum));
                    Phase::SeekMin(k)
                } else if moved(y[lo], y[k]) && lo < k && y[k] > y[lo] {
                    out.push(refined(times, y, lo, ExtremumKind::Minimum));
                    Phase::SeekMax(k)
                } else {
                    Phase::Unknown { hi, lo }
                }
            }
            Phase::SeekMin(c) => {
                if y[k] < y[c] {
                    Phase::SeekMin(k)
                } else if moved(y[c], y[k]) {
                    out.push(refined(times, y, c, ExtremumKind::Minimum));
                    Phase::SeekMax(k)
                } else {
                    Phase::SeekMin(c)
                }
            }
            Phase::SeekMax(c) => {
                if y[k] > y[c] {
                    Phase::SeekMax(k)
                } else if moved(y[k], y[c]) {
                    out.push(refined(times, y, c, ExtremumKind::Maximum));
                    Phase::SeekMin(k)
                } else {
                    Phase::SeekMax(c)
                }
            }
        };
    }
    out
}

/// Number of minima of `y` that are followed by a maximum of at least
/// `floor_fraction` of the global peak, i.e. collapses that still revive.
pub fn collapse_revival_count(times: &[f64], y: &[f64], floor_fraction: f64) -> usize {
    let ext = extract_extrema(times, y, floor_fraction);
    let peak = y.iter().copied().fold(0.0, f64::max);
    ext.windows(2)
        .filter(|w| {
            w[0].kind == ExtremumKind::Minimum && w[1].kind == ExtremumKind::Maximum && w[1].value >= floor_fraction * peak
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn rectified_cosine_spacing() {
        let f = 1e5;
        let dt = 1e-8;
        let t: Vec<f64> = (0..5000).map(|k| k as f64 * dt).collect();
        let y: Vec<f64> = t.iter().map(|&t| (TAU * f * t).cos().abs()).collect();
        let ext = extract_extrema(&t, &y, 0.1);
        let maxima: Vec<f64> = ext.iter().filter(|e| e.kind == ExtremumKind::Maximum).map(|e| e.t).collect();
        let minima: Vec<f64> = ext.iter().filter(|e| e.kind == ExtremumKind::Minimum).map(|e| e.t).collect();
        assert_eq!(maxima[0], 0.0);
        for w in maxima.windows(2).chain(minima.windows(2)) {
            assert!((w[1] - w[0] - 0.5 / f).abs() < dt, "{:?}", w);
        }
        for w in ext.windows(2) {
            assert_ne!(w[0].kind, w[1].kind);
        }
    }

    #[test]
    fn monotone_decay_has_only_the_start() {
        let t: Vec<f64> = (0..100).map(|k| k as f64).collect();
        let y: Vec<f64> = t.iter().map(|&t| (-t / 20.0).exp()).collect();
        let ext = extract_extrema(&t, &y, 0.01);
        assert_eq!(ext.len(), 1);
        assert_eq!(ext[0].kind, ExtremumKind::Maximum);
        assert_eq!(ext[0].t, 0.0);
    }

    #[test]
    fn small_wiggles_are_filtered() {
        let t: Vec<f64> = (0..2000).map(|k| k as f64 * 1e-3).collect();
        let y: Vec<f64> = t.iter().map(|&t| (TAU * t).sin() + 1e-3 * (TAU * 50.0 * t).sin()).collect();
        let ext = extract_extrema(&t, &y, 0.05);
        assert_eq!(ext.iter().filter(|e| e.kind == ExtremumKind::Maximum).count(), 2);
        assert!(extract_extrema(&t[..4], &y[..4], 0.0).is_empty());
    }

    #[test]
    fn revival_count_stops_at_floor() {
        // |cos| under a decaying envelope falls below 1e-2 after about 4.6 periods
        let t: Vec<f64> = (0..20000).map(|k| k as f64 * 1e-3).collect();
        let y: Vec<f64> = t.iter().map(|&t| (TAU * t).cos().abs() * (-t).exp()).collect();
        let n = collapse_revival_count(&t, &y, 1e-2);
        assert_eq!(n, 9);
    }
}
