//! Curvature of the photon number at its extrema compared with the
//! mean-field operator expression
//! `n'' = g^2 (<S+S-> + <S-S+>) + 4 g^2 (n + 1/2) <S_z>`,
//! where `<S+S-> + <S-S+>` is factorized as `2 |<S->|^2`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::model::SimulationTrace;
use super::SemiclassicalError;
use crate::params::PhysicalParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcavityRecord {
    pub index: usize,
    pub t: f64,
    pub kind: ExtremumKind,
    pub n: f64,
    pub n_ddot_measured: f64,
    pub n_ddot_model: f64,
}

/// Largest sampling interval accepted by [`concavity_check`].
pub fn max_output_dt(params: &PhysicalParams) -> f64 {
    1.0 / (40.0 * params.collective_coupling() / TAU)
}

/// Five-point central second difference of `n` at `k` (needs 2 <= k < len-2).
pub fn second_derivative(n: &[f64], k: usize, dt: f64) -> f64 {
    (-n[k + 2] + 16.0 * n[k + 1] - 30.0 * n[k] + 16.0 * n[k - 1] - n[k - 2]) / (12.0 * dt * dt)
}

pub fn model_second_derivative(params: &PhysicalParams, trace: &SimulationTrace, k: usize) -> f64 {
    let g2 = params.coupling_g * params.coupling_g;
    let n = trace.a[k].norm_sqr();
    g2 * 2.0 * trace.s_minus[k].norm_sqr() + 4.0 * g2 * (n + 0.5) * trace.s_z[k]
}

/// Records every post-drive local extremum of `n(t)`.
pub fn concavity_check(trace: &SimulationTrace, params: &PhysicalParams) -> Result<Vec<ConcavityRecord>, SemiclassicalError> {
    let dt = trace.dt();
    let required = max_output_dt(params);
    if !(dt > 0.0) || dt > required * (1.0 + 1e-12) {
        return Err(SemiclassicalError::GridTooCoarse { dt, required });
    }
    let n = trace.photon_number();
    let drive_end = trace.drive_end();
    let mut out = Vec::new();
    for k in 2..n.len().saturating_sub(2) {
        if trace.times[k] <= drive_end {
            continue;
        }
        let kind = if n[k - 1] > n[k] && n[k] <= n[k + 1] {
            ExtremumKind::Minimum
        } else if n[k - 1] < n[k] && n[k] >= n[k + 1] {
            ExtremumKind::Maximum
        } else {
            continue;
        };
        out.push(ConcavityRecord {
            index: k,
            t: trace.times[k],
            kind,
            n: n[k],
            n_ddot_measured: second_derivative(&n, k, dt),
            n_ddot_model: model_second_derivative(params, trace, k),
        });
    }
    Ok(out)
}
