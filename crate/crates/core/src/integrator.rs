//! Adaptive Dormand-Prince 5(4) integration with dense output onto a uniform
//! time grid.
//!
//! The state is a real vector; complex components are stored as interleaved
//! `(re, im)` pairs by the caller. Right-hand sides with jumps (pulsed drives)
//! declare their discontinuities as breakpoints: the integrator lands exactly
//! on each one and restarts from the right-hand limit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("step size underflow at t = {t:e} s (last accepted time)")]
    StepSizeUnderflow { t: f64 },
    #[error("non-finite derivative encountered near t = {t:e} s")]
    NonFinite { t: f64 },
    #[error("maximum number of steps ({max_steps}) exceeded at t = {t:e} s")]
    MaxStepsExceeded { t: f64, max_steps: usize },
}

/// Initial value problem `y' = rhs(t, y)` on `[t_start, t_end]`.
pub struct OdeProblem<F> {
    pub t_start: f64,
    pub t_end: f64,
    pub initial_state: Vec<f64>,
    pub rhs: F,
    /// Times where `rhs` may be discontinuous. Values outside the open
    /// interval are ignored.
    pub breakpoints: Vec<f64>,
}

impl<F> OdeProblem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(t_start: f64, t_end: f64, initial_state: Vec<f64>, rhs: F) -> Self {
        Self {
            t_start,
            t_end,
            initial_state,
            rhs,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_breakpoints(mut self, breakpoints: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints = breakpoints.into_iter().collect();
        self
    }

    pub fn dimension(&self) -> usize {
        self.initial_state.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the internal step, seconds; unbounded is stored as null.
    #[serde(with = "unbounded")]
    pub max_step: f64,
    /// Sampling interval of the returned trajectory, seconds.
    pub output_dt: f64,
    pub max_steps: usize,
}

impl IntegratorConfig {
    pub fn new(output_dt: f64) -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            output_dt,
            max_steps: 5_000_000,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    fn validate(&self) -> Result<(), IntegratorError> {
        let bad = |msg: &str| Err(IntegratorError::InvalidConfig(msg.to_string()));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.output_dt > 0.0 && self.output_dt.is_finite()) {
            return bad("output_dt must be positive and finite");
        }
        if !(self.max_step > 0.0) {
            return bad("max_step must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

/// Solution sampled at `t_start + k * output_dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dimension: usize,
    pub times: Vec<f64>,
    states: Vec<f64>,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dimension..(k + 1) * self.dimension]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times
            .iter()
            .copied()
            .zip(self.states.chunks_exact(self.dimension))
    }
}

mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension (Hairer, Norsett & Wanner).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

struct Workspace {
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    err: Vec<f64>,
    dense: [Vec<f64>; 5],
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = || vec![0.0; n];
        Self {
            k: [z(), z(), z(), z(), z(), z(), z()],
            y_stage: z(),
            y_new: z(),
            err: z(),
            dense: [z(), z(), z(), z(), z()],
        }
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates `problem` and samples the solution on the uniform output grid.
pub fn integrate<F>(problem: &OdeProblem<F>, config: &IntegratorConfig) -> Result<Trajectory, IntegratorError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    config.validate()?;
    let t0 = problem.t_start;
    let t_end = problem.t_end;
    if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(IntegratorError::InvalidConfig(format!(
            "need t_end > t_start, got [{t0:e}, {t_end:e}]"
        )));
    }
    let n = problem.dimension();
    if n == 0 {
        return Err(IntegratorError::InvalidConfig("empty state".into()));
    }
    if !all_finite(&problem.initial_state) {
        return Err(IntegratorError::NonFinite { t: t0 });
    }

    let dt = config.output_dt;
    let span = t_end - t0;
    let n_out = ((span / dt) * (1.0 + 1e-12)).floor() as usize + 1;
    let grid = |k: usize| t0 + k as f64 * dt;

    let mut times = Vec::with_capacity(n_out);
    let mut states = Vec::with_capacity(n_out * n);
    times.push(t0);
    states.extend_from_slice(&problem.initial_state);
    let mut next_out = 1usize;

    let mut stops: Vec<f64> = problem
        .breakpoints
        .iter()
        .copied()
        .filter(|&b| b > t0 && b < t_end)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(t_end);

    let rhs = &problem.rhs;
    let mut stats = IntegrationStats::default();
    let mut ws = Workspace::new(n);
    let mut y = problem.initial_state.clone();
    let mut t = t0;

    rhs(t, &y, &mut ws.k[0]);
    stats.rhs_evaluations += 1;
    if !all_finite(&ws.k[0]) {
        return Err(IntegratorError::NonFinite { t });
    }
    let mut h = initial_step(rhs, t, &y, &ws.k[0], config, span, &mut stats)?;
    let mut fac_old = 1e-4_f64;
    let h_min_abs = 16.0 * f64::EPSILON * t0.abs().max(t_end.abs()).max(span);

    for &stop in &stops {
        // stage times are clamped below a breakpoint so the step only sees
        // the left-hand limit of the rhs
        let t_clamp = if stop < t_end { stop.next_down() } else { stop };
        while t < stop {
            if stats.accepted + stats.rejected >= config.max_steps {
                return Err(IntegratorError::MaxStepsExceeded {
                    t,
                    max_steps: config.max_steps,
                });
            }
            h = h.min(config.max_step);
            let mut last = false;
            if t + h >= stop || (stop - t - h) < 1e-12 * h {
                h = stop - t;
                last = true;
            }
            if h < h_min_abs {
                return Err(IntegratorError::StepSizeUnderflow { t });
            }

            let err = dopri_step(rhs, t, h, &y, &mut ws, config, t_clamp, &mut stats)?;

            if err <= 1.0 {
                let fac11 = err.powf(0.2 - BETA * 0.75);
                let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                fac_old = err.max(1e-4);
                stats.accepted += 1;

                let t_new = if last { stop } else { t + h };
                prepare_dense(h, &y, &mut ws);
                while next_out < n_out {
                    let tk = grid(next_out);
                    if tk > t_new {
                        break;
                    }
                    let theta = ((tk - t) / h).clamp(0.0, 1.0);
                    times.push(tk);
                    if tk == t_new {
                        states.extend_from_slice(&ws.y_new);
                    } else {
                        dense_eval(theta, &ws.dense, &mut states);
                    }
                    next_out += 1;
                }

                std::mem::swap(&mut y, &mut ws.y_new);
                t = t_new;
                let (first, rest) = ws.k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                h /= fac;
            } else {
                let fac11 = err.powf(0.2 - BETA * 0.75);
                h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
                stats.rejected += 1;
            }
        }
        if stop < t_end {
            // restart from the right-hand limit
            rhs(t, &y, &mut ws.k[0]);
            stats.rhs_evaluations += 1;
            if !all_finite(&ws.k[0]) {
                return Err(IntegratorError::NonFinite { t });
            }
        }
    }

    // grid points that coincide with t_end up to rounding
    while next_out < n_out {
        times.push(grid(next_out));
        states.extend_from_slice(&y);
        next_out += 1;
    }

    Ok(Trajectory {
        dimension: n,
        times,
        states,
        stats,
    })
}

#[allow(clippy::too_many_arguments)]
fn dopri_step<F>(
    rhs: &F,
    t: f64,
    h: f64,
    y: &[f64],
    ws: &mut Workspace,
    config: &IntegratorConfig,
    t_clamp: f64,
    stats: &mut IntegrationStats,
) -> Result<f64, IntegratorError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let ts = |c: f64| (t + c * h).min(t_clamp);
    let Workspace {
        k, y_stage, y_new, err, ..
    } = ws;
    let [k1, k2, k3, k4, k5, k6, k7] = k;

    for i in 0..n {
        y_stage[i] = y[i] + h * A21 * k1[i];
    }
    rhs(ts(C2), y_stage, k2);
    for i in 0..n {
        y_stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    rhs(ts(C3), y_stage, k3);
    for i in 0..n {
        y_stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    rhs(ts(C4), y_stage, k4);
    for i in 0..n {
        y_stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    rhs(ts(C5), y_stage, k5);
    for i in 0..n {
        y_stage[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    rhs(ts(1.0), y_stage, k6);
    for i in 0..n {
        y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    rhs(ts(1.0), y_new, k7);
    stats.rhs_evaluations += 6;

    if !(all_finite(y_new) && all_finite(k7)) {
        return Err(IntegratorError::NonFinite { t: t + h });
    }

    let mut sum = 0.0;
    for i in 0..n {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sk = config.abs_tol + config.rel_tol * y[i].abs().max(y_new[i].abs());
        sum += (err[i] / sk).powi(2);
    }
    let e = (sum / n as f64).sqrt();
    if !e.is_finite() {
        return Err(IntegratorError::NonFinite { t: t + h });
    }
    Ok(e)
}

fn prepare_dense(h: f64, y: &[f64], ws: &mut Workspace) {
    let [k1, _, k3, k4, k5, k6, k7] = &ws.k;
    let [r1, r2, r3, r4, r5] = &mut ws.dense;
    for i in 0..y.len() {
        let dy = ws.y_new[i] - y[i];
        let bspl = h * k1[i] - dy;
        r1[i] = y[i];
        r2[i] = dy;
        r3[i] = bspl;
        r4[i] = dy - h * k7[i] - bspl;
        r5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
}

fn dense_eval(theta: f64, dense: &[Vec<f64>; 5], out: &mut Vec<f64>) {
    let theta1 = 1.0 - theta;
    let [r1, r2, r3, r4, r5] = dense;
    for i in 0..r1.len() {
        out.push(r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i]))));
    }
}

fn initial_step<F>(
    rhs: &F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    config: &IntegratorConfig,
    span: f64,
    stats: &mut IntegrationStats,
) -> Result<f64, IntegratorError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len() as f64;
    let sk: Vec<f64> = y.iter().map(|v| config.abs_tol + config.rel_tol * v.abs()).collect();
    let dnf = (f0.iter().zip(&sk).map(|(f, s)| (f / s).powi(2)).sum::<f64>() / n).sqrt();
    let dny = (y.iter().zip(&sk).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let mut h = if dnf <= 1e-5 || dny <= 1e-5 {
        1e-6 * span
    } else {
        0.01 * dny / dnf
    };
    h = h.min(config.max_step).min(span);

    let y1: Vec<f64> = y.iter().zip(f0).map(|(v, f)| v + h * f).collect();
    let mut f1 = vec![0.0; y.len()];
    rhs(t + h, &y1, &mut f1);
    stats.rhs_evaluations += 1;
    if !all_finite(&f1) {
        return Err(IntegratorError::NonFinite { t });
    }
    let der2 = (f1
        .iter()
        .zip(f0)
        .zip(&sk)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h;
    let der12 = der2.max(dnf);
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6 * span)
    } else {
        (0.01 / der12).powf(0.2)
    };
    Ok((100.0 * h).min(h1).min(config.max_step).min(span))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn harmonic(omega: f64) -> impl Fn(f64, &[f64], &mut [f64]) {
        move |_t, y, dy| {
            dy[0] = y[1];
            dy[1] = -omega * omega * y[0];
        }
    }

    #[test]
    fn exponential_decay() {
        let lambda = 1e6;
        let p = OdeProblem::new(0.0, 5e-6, vec![1.0], move |_t, y: &[f64], dy: &mut [f64]| {
            dy[0] = -lambda * y[0];
        });
        let cfg = IntegratorConfig::new(1e-7).with_tolerances(1e-10, 1e-14);
        let tr = integrate(&p, &cfg).unwrap();
        assert_eq!(tr.len(), 51);
        let x = tr.last_state()[0];
        assert!((x / (-5.0f64).exp() - 1.0).abs() < 1e-9, "x = {x}");
        for (t, y) in tr.iter() {
            assert!((y[0] - (-lambda * t).exp()).abs() < 1e-9 * (-lambda * t).exp() + 1e-14);
        }
    }

    #[test]
    fn oscillator_energy_drift() {
        let omega = TAU * 1e6;
        let p = OdeProblem::new(0.0, 30e-6, vec![1.0, 0.0], harmonic(omega));
        let cfg = IntegratorConfig::new(1e-8).with_tolerances(1e-10, 1e-12);
        let tr = integrate(&p, &cfg).unwrap();
        let energy = |y: &[f64]| 0.5 * (y[1] * y[1] / (omega * omega) + y[0] * y[0]);
        let e0 = energy(tr.state(0));
        let drift = tr
            .iter()
            .map(|(_, y)| (energy(y) / e0 - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-8, "drift = {drift:e}");
    }

    #[test]
    fn grid_is_uniform_and_starts_at_initial_state() {
        let p = OdeProblem::new(1.0, 2.05, vec![0.3, -0.2], harmonic(3.0));
        let tr = integrate(&p, &IntegratorConfig::new(0.1)).unwrap();
        assert_eq!(tr.state(0), &[0.3, -0.2]);
        assert_eq!(tr.len(), 11);
        for (k, t) in tr.times.iter().enumerate() {
            assert_eq!(*t, 1.0 + k as f64 * 0.1);
        }
    }

    #[test]
    fn dense_output_is_accurate_between_steps() {
        // large max_step so that many grid points fall inside one step
        let omega = 1.0;
        let p = OdeProblem::new(0.0, 10.0, vec![1.0, 0.0], harmonic(omega));
        let cfg = IntegratorConfig::new(0.01).with_tolerances(1e-9, 1e-12);
        let tr = integrate(&p, &cfg).unwrap();
        assert!(tr.stats.accepted < tr.len() / 4);
        let worst = tr
            .iter()
            .map(|(t, y)| (y[0] - t.cos()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-7, "worst = {worst:e}");
    }

    #[test]
    fn breakpoints_handle_step_forcing() {
        // y' = 1 on [0, 1), 0 afterwards
        let p = OdeProblem::new(0.0, 3.0, vec![0.0], |t: f64, _y: &[f64], dy: &mut [f64]| {
            dy[0] = if t < 1.0 { 1.0 } else { 0.0 };
        })
        .with_breakpoints([1.0]);
        let tr = integrate(&p, &IntegratorConfig::new(0.25)).unwrap();
        for (t, y) in tr.iter() {
            assert!((y[0] - t.min(1.0)).abs() < 1e-12, "t={t} y={}", y[0]);
        }
        assert!(tr.stats.rejected < 5);
    }

    #[test]
    fn nan_rhs_is_reported() {
        let p = OdeProblem::new(0.0, 1.0, vec![1.0], |t: f64, _y: &[f64], dy: &mut [f64]| {
            dy[0] = if t > 0.5 { f64::NAN } else { 1.0 };
        });
        let e = integrate(&p, &IntegratorConfig::new(0.1)).unwrap_err();
        assert!(matches!(e, IntegratorError::NonFinite { t } if t > 0.5));
    }

    #[test]
    fn blow_up_is_step_underflow() {
        // y' = y^2 reaches infinity at t = 1
        let p = OdeProblem::new(0.0, 2.0, vec![1.0], |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[0] * y[0];
        });
        let e = integrate(&p, &IntegratorConfig::new(0.1)).unwrap_err();
        match e {
            IntegratorError::StepSizeUnderflow { t } | IntegratorError::NonFinite { t } => {
                assert!(t > 0.9 && t <= 1.0 + 1e-6, "t = {t}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        let p = OdeProblem::new(0.0, 1.0, vec![1.0], |_t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = 0.0);
        assert!(integrate(&p, &IntegratorConfig::new(0.0)).is_err());
        assert!(integrate(&p, &IntegratorConfig::new(0.1).with_tolerances(-1.0, 1e-9)).is_err());
        let q = OdeProblem::new(1.0, 1.0, vec![1.0], |_t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = 0.0);
        assert!(integrate(&q, &IntegratorConfig::new(0.1)).is_err());
    }

    #[test]
    fn tighter_tolerance_never_worse() {
        let omega = TAU * 1e6;
        let run = |rtol: f64| {
            let p = OdeProblem::new(0.0, 10e-6, vec![1.0, 0.0], harmonic(omega));
            let cfg = IntegratorConfig::new(1e-7).with_tolerances(rtol, rtol * 1e-2);
            let y = integrate(&p, &cfg).unwrap().last_state().to_vec();
            (y[0] - (omega * 10e-6).cos()).abs()
        };
        let mut prev = f64::INFINITY;
        for rtol in [1e-6, 5e-7, 2.5e-7, 1.25e-7, 6.25e-8] {
            let e = run(rtol);
            assert!(e <= prev * 1.05, "rtol {rtol:e}: {e:e} > {prev:e}");
            prev = e;
        }
    }

    #[test]
    fn restart_from_midpoint_reproduces_final_state() {
        let omega = TAU * 1e6;
        let cfg = IntegratorConfig::new(1e-7).with_tolerances(1e-9, 1e-12);
        let full = integrate(&OdeProblem::new(0.0, 4e-6, vec![1.0, 0.0], harmonic(omega)), &cfg).unwrap();
        let mid = full.len() / 2;
        let y_mid = full.state(mid).to_vec();
        let t_mid = full.times[mid];
        let second = integrate(&OdeProblem::new(t_mid, 4e-6, y_mid, harmonic(omega)), &cfg).unwrap();
        let a = full.last_state();
        let b = second.last_state();
        let scale = 1.0 + omega;
        for i in 0..2 {
            let tol = 10.0 * (1e-9 * a[i].abs().max(b[i].abs()) + 1e-12) * scale;
            assert!((a[i] - b[i]).abs() < tol, "{} vs {}", a[i], b[i]);
        }
    }
}
