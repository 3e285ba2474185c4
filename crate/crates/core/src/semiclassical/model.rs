//! Maxwell-Bloch equations in the frame rotating at `omega_frame`.
//!
//! Integration runs on normalized variables `alpha = a / sqrt(N)`,
//! `sigma = s_- / N`, `zeta = s_z / N`, so that only `G = g sqrt(N)` enters
//! and all components are O(1) for any ensemble size.

use num_complex::Complex64;

use super::drive::DriveEnvelope;
use super::SemiclassicalError;
use crate::integrator::{integrate, IntegratorConfig, OdeProblem};
use crate::params::PhysicalParams;
use crate::state::{BlochCoordinates, SemiclassicalState, ZeroRadius};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Time derivative of `(a, s_-, s_z)` with mean-field factorization.
pub fn maxwell_bloch_rhs(
    state: &SemiclassicalState,
    t: f64,
    params: &PhysicalParams,
    drive: &DriveEnvelope,
) -> SemiclassicalState {
    let g = params.coupling_g;
    let a = state.a;
    let s = state.s_minus;
    let da = -(params.kappa_total() + I * params.cavity_detuning()) * a - I * g * s - I * drive.value_at(t);
    let ds = -(params.gamma + I * params.spin_detuning()) * s + 2.0 * I * g * a * state.s_z;
    // i g (a* s - a s*) = -2 g Im(a* s)
    let dz = -2.0 * g * (a.conj() * s).im;
    SemiclassicalState::new(da, ds, dz)
}

/// Coefficients of the normalized system.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NormalizedModel {
    pub kappa: f64,
    pub gamma: f64,
    pub delta_c: f64,
    pub delta_s: f64,
    pub big_g: f64,
    pub sqrt_n: f64,
}

impl NormalizedModel {
    pub fn new(p: &PhysicalParams) -> Self {
        Self {
            kappa: p.kappa_total(),
            gamma: p.gamma,
            delta_c: p.cavity_detuning(),
            delta_s: p.spin_detuning(),
            big_g: p.collective_coupling(),
            sqrt_n: p.n_spins.sqrt(),
        }
    }

    pub fn to_normalized(self, s: &SemiclassicalState) -> [f64; 5] {
        let n = self.sqrt_n * self.sqrt_n;
        let a = s.a / self.sqrt_n;
        let sm = s.s_minus / n;
        [a.re, a.im, sm.re, sm.im, s.s_z / n]
    }

    pub fn to_physical(self, y: &[f64]) -> SemiclassicalState {
        let n = self.sqrt_n * self.sqrt_n;
        SemiclassicalState::new(
            Complex64::new(y[0], y[1]) * self.sqrt_n,
            Complex64::new(y[2], y[3]) * n,
            y[4] * n,
        )
    }

    /// `v` is the physical drive divided by sqrt(N).
    #[inline]
    pub fn rhs(&self, v: Complex64, y: &[f64], dy: &mut [f64]) {
        let (ar, ai, sr, si, z) = (y[0], y[1], y[2], y[3], y[4]);
        let g = self.big_g;
        // d alpha = -(kappa + i dc) alpha - i G sigma - i v
        dy[0] = -self.kappa * ar + self.delta_c * ai + g * si + v.im;
        dy[1] = -self.kappa * ai - self.delta_c * ar - g * sr - v.re;
        // d sigma = -(gamma + i ds) sigma + 2 i G alpha zeta
        dy[2] = -self.gamma * sr + self.delta_s * si - 2.0 * g * ai * z;
        dy[3] = -self.gamma * si - self.delta_s * sr + 2.0 * g * ar * z;
        // d zeta = -2 G Im(alpha* sigma)
        dy[4] = -2.0 * g * (ar * si - ai * sr);
    }
}

/// Time-gridded record of a semiclassical (or oracle) run in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub a: Vec<Complex64>,
    pub s_minus: Vec<Complex64>,
    pub s_z: Vec<f64>,
    pub params: PhysicalParams,
    pub drive: DriveEnvelope,
    pub integrator: Option<IntegratorConfig>,
    /// Analysis mask after the drive ends; samples are never removed.
    pub dead_time: f64,
    /// Set for traces produced by the exact quantum solver.
    pub oracle: bool,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> SemiclassicalState {
        SemiclassicalState::new(self.a[k], self.s_minus[k], self.s_z[k])
    }

    pub fn photon_number(&self) -> Vec<f64> {
        self.a.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn abs_a(&self) -> Vec<f64> {
        self.a.iter().map(|a| a.norm()).collect()
    }

    pub fn bloch(&self, k: usize) -> Result<BlochCoordinates, ZeroRadius> {
        self.state(k).bloch()
    }

    /// Sampling interval, assuming a uniform grid.
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn drive_end(&self) -> f64 {
        self.drive.end_time()
    }

    /// First time not masked by the dead time.
    pub fn analysis_start(&self) -> f64 {
        self.drive_end() + self.dead_time
    }

    /// Index of the first sample at or after `t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&x| x < t)
    }
}

/// Integrates from an arbitrary initial state over `[0, t_total]`.
pub fn simulate(
    params: &PhysicalParams,
    drive: &DriveEnvelope,
    initial: &SemiclassicalState,
    t_total: f64,
    config: &IntegratorConfig,
) -> Result<SimulationTrace, SemiclassicalError> {
    params.validate()?;
    let model = NormalizedModel::new(params);
    let inv_sqrt_n = 1.0 / model.sqrt_n;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| model.rhs(drive.value_at(t) * inv_sqrt_n, y, dy);
    let problem = OdeProblem::new(0.0, t_total, model.to_normalized(initial).to_vec(), rhs)
        .with_breakpoints(drive.breakpoints());
    let traj = integrate(&problem, config).map_err(|source| SemiclassicalError::Integrator {
        context: format!("Maxwell-Bloch run over {t_total:e} s with N = {:e}", params.n_spins),
        source,
    })?;

    let n = traj.len();
    let mut a = Vec::with_capacity(n);
    let mut s_minus = Vec::with_capacity(n);
    let mut s_z = Vec::with_capacity(n);
    for (_, y) in traj.iter() {
        let s = model.to_physical(y);
        a.push(s.a);
        s_minus.push(s.s_minus);
        s_z.push(s.s_z);
    }
    // the first sample is the initial state exactly, not a round trip through scaling
    a[0] = initial.a;
    s_minus[0] = initial.s_minus;
    s_z[0] = initial.s_z;
    Ok(SimulationTrace {
        times: traj.times,
        a,
        s_minus,
        s_z,
        params: *params,
        drive: drive.clone(),
        integrator: Some(*config),
        dead_time: 0.0,
        oracle: false,
    })
}

/// Free-induction-decay run starting from the polarized ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct FidExperiment {
    pub params: PhysicalParams,
    pub drive: DriveEnvelope,
    pub t_total: f64,
    pub output_dt: f64,
    pub dead_time: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl FidExperiment {
    pub const DEFAULT_T_TOTAL: f64 = 30e-6;
    pub const DEFAULT_OUTPUT_DT: f64 = 5e-9;
    pub const DEFAULT_DEAD_TIME: f64 = 3e-6;

    pub fn new(params: PhysicalParams, drive: DriveEnvelope) -> Self {
        let cfg = IntegratorConfig::new(Self::DEFAULT_OUTPUT_DT);
        Self {
            params,
            drive,
            t_total: Self::DEFAULT_T_TOTAL,
            output_dt: Self::DEFAULT_OUTPUT_DT,
            dead_time: Self::DEFAULT_DEAD_TIME,
            rel_tol: cfg.rel_tol,
            abs_tol: cfg.abs_tol,
            max_step: cfg.max_step,
        }
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        IntegratorConfig::new(self.output_dt)
            .with_tolerances(self.rel_tol, self.abs_tol)
            .with_max_step(self.max_step)
    }

    pub fn validate(&self) -> Result<(), SemiclassicalError> {
        if !(self.t_total > self.drive.end_time()) {
            return Err(SemiclassicalError::InvalidExperiment(format!(
                "t_total = {:e} s must exceed the drive end {:e} s",
                self.t_total,
                self.drive.end_time()
            )));
        }
        if !(self.dead_time >= 0.0) {
            return Err(SemiclassicalError::InvalidExperiment(format!(
                "dead_time must be >= 0, got {:e}",
                self.dead_time
            )));
        }
        Ok(())
    }
}

pub fn run_fid(exp: &FidExperiment) -> Result<SimulationTrace, SemiclassicalError> {
    exp.validate()?;
    let ground = SemiclassicalState::ground(exp.params.n_spins);
    let mut trace = simulate(&exp.params, &exp.drive, &ground, exp.t_total, &exp.integrator_config())?;
    trace.dead_time = exp.dead_time;
    Ok(trace)
}
