//! Propagation of pure states (Schrödinger) and density matrices (Lindblad)
//! with collapse operators `sqrt(2 kappa) a` and `sqrt(2 gamma) S_z`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::DickeFockBasis;
use super::generator::TcGenerator;
use super::state::QuantumState;
use super::OracleError;
use crate::integrator::{integrate, IntegratorConfig, OdeProblem};
use crate::params::PhysicalParams;
use crate::semiclassical::{DriveEnvelope, SimulationTrace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationRates {
    /// Cavity amplitude decay rate, rad/s.
    pub kappa: f64,
    /// Spin coherence decay rate, rad/s.
    pub gamma: f64,
}

impl DissipationRates {
    pub fn none() -> Self {
        Self { kappa: 0.0, gamma: 0.0 }
    }

    pub fn from_params(p: &PhysicalParams) -> Self {
        Self {
            kappa: p.kappa_total(),
            gamma: p.gamma,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.kappa == 0.0 && self.gamma == 0.0
    }
}

/// Uniform output grid `0, dt, 2 dt, ..., <= t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_end: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t_end: f64, dt: f64) -> Result<Self, OracleError> {
        if !(t_end > 0.0 && dt > 0.0 && dt <= t_end) {
            return Err(OracleError::InvalidGrid(format!("t_end = {t_end:e}, dt = {dt:e}")));
        }
        Ok(Self { t_end, dt })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Cap on stored amplitudes (pure) or density-matrix entries.
    pub dimension_cap: usize,
    /// Largest tolerated population of the top Fock level.
    pub cutoff_population: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            dimension_cap: 40_000,
            cutoff_population: 1e-6,
        }
    }
}

/// Expectation values on the output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationTrace {
    pub basis: DickeFockBasis,
    pub times: Vec<f64>,
    pub a: Vec<Complex64>,
    pub s_minus: Vec<Complex64>,
    pub s_z: Vec<f64>,
    pub photons: Vec<f64>,
    pub s_plus_s_minus: Vec<f64>,
    /// Norm squared (pure) or trace (density).
    pub trace_norm: Vec<f64>,
    pub max_boundary_population: f64,
}

impl ExpectationTrace {
    /// `<a^dag a + S_z>` per sample.
    pub fn excitation(&self) -> Vec<f64> {
        self.photons.iter().zip(&self.s_z).map(|(n, z)| n + z).collect()
    }

    /// Same layout as semiclassical traces, flagged as oracle output.
    pub fn to_simulation_trace(&self, params: &PhysicalParams) -> SimulationTrace {
        SimulationTrace {
            times: self.times.clone(),
            a: self.a.clone(),
            s_minus: self.s_minus.clone(),
            s_z: self.s_z.clone(),
            params: *params,
            drive: DriveEnvelope::none(),
            integrator: None,
            dead_time: 0.0,
            oracle: true,
        }
    }
}

fn as_complex(y: &[f64]) -> &[Complex64] {
    assert!(y.len().is_multiple_of(2));
    // SAFETY: Complex64 is repr(C) { re: f64, im: f64 } with f64 alignment.
    unsafe { std::slice::from_raw_parts(y.as_ptr() as *const Complex64, y.len() / 2) }
}

fn as_complex_mut(y: &mut [f64]) -> &mut [Complex64] {
    assert!(y.len().is_multiple_of(2));
    // SAFETY: as above; the borrow is unique.
    unsafe { std::slice::from_raw_parts_mut(y.as_mut_ptr() as *mut Complex64, y.len() / 2) }
}

fn to_real(v: &[Complex64]) -> Vec<f64> {
    v.iter().flat_map(|c| [c.re, c.im]).collect()
}

struct Sample {
    a: Complex64,
    s_minus: Complex64,
    s_z: f64,
    photons: f64,
    spsm: f64,
    norm: f64,
    boundary: f64,
}

fn pure_expectations(b: &DickeFockBasis, psi: &[Complex64]) -> Sample {
    let mut s = Sample {
        a: Complex64::default(),
        s_minus: Complex64::default(),
        s_z: 0.0,
        photons: 0.0,
        spsm: 0.0,
        norm: 0.0,
        boundary: 0.0,
    };
    let sp = b.total_spin();
    for i in 0..psi.len() {
        let (m, n) = b.split(i);
        let p = psi[i].norm_sqr();
        let mv = b.m_value(m);
        s.norm += p;
        s.photons += n as f64 * p;
        s.s_z += mv * p;
        s.spsm += (sp + mv) * (sp - mv + 1.0) * p;
        if n == b.n_max {
            s.boundary += p;
        }
        if n < b.n_max {
            s.a += psi[i].conj() * ((n + 1) as f64).sqrt() * psi[i + 1];
        }
        if m > 0 {
            s.s_minus += psi[b.index(m - 1, n)].conj() * b.s_minus_element(m) * psi[i];
        }
    }
    s
}

fn density_expectations(b: &DickeFockBasis, rho: &[Complex64]) -> Sample {
    let d = b.dimension();
    let mut s = Sample {
        a: Complex64::default(),
        s_minus: Complex64::default(),
        s_z: 0.0,
        photons: 0.0,
        spsm: 0.0,
        norm: 0.0,
        boundary: 0.0,
    };
    let sp = b.total_spin();
    for i in 0..d {
        let (m, n) = b.split(i);
        let p = rho[i * d + i].re;
        let mv = b.m_value(m);
        s.norm += p;
        s.photons += n as f64 * p;
        s.s_z += mv * p;
        s.spsm += (sp + mv) * (sp - mv + 1.0) * p;
        if n == b.n_max {
            s.boundary += p;
        }
        // Tr(a rho) = sum_i sqrt(n_i + 1) rho_{i+1, i}
        if n < b.n_max {
            s.a += ((n + 1) as f64).sqrt() * rho[(i + 1) * d + i];
        }
        // Tr(S- rho) = sum c-(M) rho_{(M,n),(M-1,n)}
        if m > 0 {
            s.s_minus += b.s_minus_element(m) * rho[i * d + b.index(m - 1, n)];
        }
    }
    s
}

/// Propagates `state0` and records expectation values on `grid`.
pub fn evolve_exact(
    state0: &QuantumState,
    generator: &TcGenerator,
    dissipation: &DissipationRates,
    grid: &TimeGrid,
    opts: &OracleOptions,
) -> Result<ExpectationTrace, OracleError> {
    let b = generator.basis;
    if state0.basis() != &b {
        return Err(OracleError::InvalidState("state and generator use different bases".into()));
    }
    if !(dissipation.kappa >= 0.0 && dissipation.gamma >= 0.0) {
        return Err(OracleError::InvalidState("dissipation rates must be >= 0".into()));
    }
    let d = b.dimension();
    let h = &generator.hamiltonian;
    let cfg = IntegratorConfig::new(grid.dt).with_tolerances(opts.rel_tol, opts.abs_tol);

    let pure = match state0 {
        QuantumState::Pure { amplitudes, .. } if dissipation.is_closed() => Some(amplitudes),
        _ => None,
    };

    let samples: Vec<(f64, Sample)> = if let Some(psi0) = pure {
        if d > opts.dimension_cap {
            return Err(OracleError::DimensionCap {
                what: "state vector",
                size: d,
                cap: opts.dimension_cap,
            });
        }
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            let psi = as_complex(y);
            let out = as_complex_mut(dy);
            for (r, o) in out.iter_mut().enumerate() {
                let acc: Complex64 = h.row(r).map(|(c, v)| v * psi[c]).sum();
                *o = Complex64::new(acc.im, -acc.re);
            }
        };
        let traj = integrate(&OdeProblem::new(0.0, grid.t_end, to_real(psi0), rhs), &cfg)?;
        traj.iter().map(|(t, y)| (t, pure_expectations(&b, as_complex(y)))).collect()
    } else {
        if d * d > opts.dimension_cap {
            return Err(OracleError::DimensionCap {
                what: "density matrix",
                size: d * d,
                cap: opts.dimension_cap,
            });
        }
        let rho0 = match state0.to_density() {
            QuantumState::Density { rho, .. } => rho,
            QuantumState::Pure { .. } => unreachable!(),
        };
        let kappa = dissipation.kappa;
        let gamma = dissipation.gamma;
        let nf: Vec<f64> = (0..d).map(|i| b.split(i).1 as f64).collect();
        let mv: Vec<f64> = (0..d).map(|i| b.m_value(b.split(i).0)).collect();
        let top: Vec<bool> = (0..d).map(|i| b.split(i).1 == b.n_max).collect();
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            let rho = as_complex(y);
            let out = as_complex_mut(dy);
            for i in 0..d {
                for j in 0..d {
                    // (H rho - rho H)_ij with rho H = sum_k rho_ik conj(H_jk)
                    let hr: Complex64 = h.row(i).map(|(k, v)| v * rho[k * d + j]).sum();
                    let rh: Complex64 = h.row(j).map(|(k, v)| rho[i * d + k] * v.conj()).sum();
                    let comm = hr - rh;
                    let r = rho[i * d + j];
                    let mut val = Complex64::new(comm.im, -comm.re);
                    val -= (kappa * (nf[i] + nf[j]) + gamma * (mv[i] - mv[j]).powi(2)) * r;
                    if !top[i] && !top[j] {
                        val += 2.0 * kappa * ((nf[i] + 1.0) * (nf[j] + 1.0)).sqrt() * rho[(i + 1) * d + j + 1];
                    }
                    out[i * d + j] = val;
                }
            }
        };
        let traj = integrate(&OdeProblem::new(0.0, grid.t_end, to_real(&rho0), rhs), &cfg)?;
        traj.iter().map(|(t, y)| (t, density_expectations(&b, as_complex(y)))).collect()
    };

    let max_boundary_population = samples.iter().map(|(_, s)| s.boundary).fold(0.0, f64::max);
    if max_boundary_population > opts.cutoff_population {
        return Err(OracleError::FockCutoff {
            n_max: b.n_max,
            max_population: max_boundary_population,
        });
    }
    let mut tr = ExpectationTrace {
        basis: b,
        times: Vec::with_capacity(samples.len()),
        a: Vec::with_capacity(samples.len()),
        s_minus: Vec::with_capacity(samples.len()),
        s_z: Vec::with_capacity(samples.len()),
        photons: Vec::with_capacity(samples.len()),
        s_plus_s_minus: Vec::with_capacity(samples.len()),
        trace_norm: Vec::with_capacity(samples.len()),
        max_boundary_population,
    };
    for (t, s) in samples {
        tr.times.push(t);
        tr.a.push(s.a);
        tr.s_minus.push(s.s_minus);
        tr.s_z.push(s.s_z);
        tr.photons.push(s.photons);
        tr.s_plus_s_minus.push(s.spsm);
        tr.trace_norm.push(s.norm);
    }
    Ok(tr)
}

/// Emission-peak statistics of the fully inverted ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayStatistics {
    /// Time of the maximum of `-d<S_z>/dt`, s.
    pub delay: f64,
    pub peak_rate: f64,
    /// First time `<S_z>` reaches zero (linear interpolation), s. For small
    /// ensembles this tracks the Dicke-cascade timescale more closely than
    /// the broad emission peak does.
    pub half_inversion: Option<f64>,
    pub trace: ExpectationTrace,
}

/// Releases `|S, S> (x) |0>` into the lossy cavity and locates the emission
/// peak.
pub fn exact_delay_statistics(
    two_s: usize,
    n_max: usize,
    params: &PhysicalParams,
    grid: &TimeGrid,
    opts: &OracleOptions,
) -> Result<DelayStatistics, OracleError> {
    let basis = DickeFockBasis::new(two_s, n_max)?;
    let generator = super::generator::build_tc_generator(&basis, params, 0.0);
    let state0 = QuantumState::dicke_fock(&basis, two_s, 0)?;
    let trace = evolve_exact(&state0, &generator, &DissipationRates::from_params(params), grid, opts)?;
    let z = &trace.s_z;
    let dt = grid.dt;
    let rate: Vec<f64> = (1..z.len() - 1).map(|k| -(z[k + 1] - z[k - 1]) / (2.0 * dt)).collect();
    let k = (1..rate.len().saturating_sub(1))
        .filter(|&k| rate[k] > rate[k - 1] && rate[k] >= rate[k + 1])
        .max_by(|&a, &b| rate[a].total_cmp(&rate[b]))
        .ok_or(OracleError::NoPeak)?;
    let off = crate::semiclassical::tipping::parabolic_offset(rate[k - 1], rate[k], rate[k + 1]);
    // rate[k] sits at grid index k + 1
    let delay = trace.times[k + 1] + off * dt;
    let half_inversion = (1..z.len())
        .find(|&j| z[j - 1] > 0.0 && z[j] <= 0.0)
        .map(|j| trace.times[j - 1] + z[j - 1] / (z[j - 1] - z[j]) * dt);
    Ok(DelayStatistics {
        delay,
        peak_rate: rate[k],
        half_inversion,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::build_tc_generator;

    fn unit_params(g: f64) -> PhysicalParams {
        let mut p = PhysicalParams::paper_2016().lossless();
        p.coupling_g = g;
        p.n_spins = 1.0;
        p
    }

    #[test]
    fn vacuum_rabi_oscillation() {
        let g = 1.0;
        let b = DickeFockBasis::new(1, 2).unwrap();
        let gen = build_tc_generator(&b, &unit_params(g), 0.0);
        let psi = QuantumState::dicke_fock(&b, 1, 0).unwrap();
        let tr = evolve_exact(&psi, &gen, &DissipationRates::none(), &TimeGrid::new(10.0, 0.01).unwrap(), &OracleOptions::default()).unwrap();
        for (t, z) in tr.times.iter().zip(&tr.s_z) {
            let p_exc = z + 0.5;
            assert!((p_exc - (g * t).cos().powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn ground_state_is_constant() {
        let b = DickeFockBasis::new(4, 3).unwrap();
        let gen = build_tc_generator(&b, &unit_params(0.3), 0.0);
        let psi = QuantumState::dicke_fock(&b, 0, 0).unwrap();
        let mut p = unit_params(0.3);
        p.kappa_int = 0.1;
        p.gamma = 0.05;
        for st in [psi.clone(), psi.to_density()] {
            let tr = evolve_exact(&st, &gen, &DissipationRates::from_params(&p), &TimeGrid::new(5.0, 0.5).unwrap(), &OracleOptions::default()).unwrap();
            assert!(tr.s_z.iter().all(|&z| (z + 2.0).abs() < 1e-14));
            assert!(tr.photons.iter().all(|&n| n.abs() < 1e-14));
        }
    }

    #[test]
    fn norm_trace_and_excitation_preserved() {
        let b = DickeFockBasis::new(4, 12).unwrap();
        let gen = build_tc_generator(&b, &unit_params(0.5), 0.0);
        let st = QuantumState::product(
            &b,
            &QuantumState::spin_coherent_amplitudes(&b, 1.2, 0.3),
            &QuantumState::coherent_amplitudes(&b, Complex64::new(1.0, 0.0)),
        )
        .unwrap();
        let opts = OracleOptions {
            cutoff_population: 1e-3,
            ..Default::default()
        };
        let grid = TimeGrid::new(8.0, 0.05).unwrap();
        let tr = evolve_exact(&st, &gen, &DissipationRates::none(), &grid, &opts).unwrap();
        let e0 = tr.excitation()[0];
        for (n, e) in tr.trace_norm.iter().zip(tr.excitation()) {
            assert!((n - 1.0).abs() < 1e-9);
            assert!((e - e0).abs() < 1e-9);
        }
        // the same state as a density matrix under loss keeps unit trace
        let b2 = DickeFockBasis::new(2, 6).unwrap();
        let gen2 = build_tc_generator(&b2, &unit_params(0.5), 0.0);
        let st2 = QuantumState::product(
            &b2,
            &QuantumState::spin_coherent_amplitudes(&b2, 1.2, 0.3),
            &QuantumState::coherent_amplitudes(&b2, Complex64::new(0.7, 0.0)),
        )
        .unwrap();
        let tr2 = evolve_exact(&st2, &gen2, &DissipationRates { kappa: 0.3, gamma: 0.1 }, &grid, &opts).unwrap();
        for n in &tr2.trace_norm {
            assert!((n - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dissipator_rates_match_mean_field_decay() {
        // bare cavity: <a> decays at kappa; free spin coherence decays at gamma
        let (kappa, gamma) = (0.4, 0.25);
        let b = DickeFockBasis::new(2, 8).unwrap();
        let gen = build_tc_generator(&b, &unit_params(0.0), 0.0);
        let st = QuantumState::product(
            &b,
            &QuantumState::spin_coherent_amplitudes(&b, std::f64::consts::FRAC_PI_2, 0.0),
            &QuantumState::coherent_amplitudes(&b, Complex64::new(0.8, 0.0)),
        )
        .unwrap();
        let tr = evolve_exact(&st, &gen, &DissipationRates { kappa, gamma }, &TimeGrid::new(3.0, 0.1).unwrap(), &OracleOptions { cutoff_population: 1e-3, ..Default::default() }).unwrap();
        for (k, t) in tr.times.iter().enumerate() {
            assert!((tr.a[k].re - 0.8 * (-kappa * t).exp()).abs() < 1e-6);
            assert!((tr.s_minus[k].re - 1.0 * (-gamma * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn caps_and_cutoff_are_enforced() {
        let b = DickeFockBasis::new(20, 20).unwrap();
        let gen = build_tc_generator(&b, &unit_params(1.0), 0.0);
        let st = QuantumState::dicke_fock(&b, 0, 0).unwrap();
        let grid = TimeGrid::new(1.0, 0.1).unwrap();
        let e = evolve_exact(&st, &gen, &DissipationRates { kappa: 1.0, gamma: 0.0 }, &grid, &OracleOptions::default()).unwrap_err();
        assert!(matches!(e, OracleError::DimensionCap { .. }));

        let b = DickeFockBasis::new(4, 2).unwrap();
        let gen = build_tc_generator(&b, &unit_params(1.0), 0.0);
        let st = QuantumState::dicke_fock(&b, 4, 0).unwrap();
        let e = evolve_exact(&st, &gen, &DissipationRates::none(), &TimeGrid::new(3.0, 0.1).unwrap(), &OracleOptions::default()).unwrap_err();
        assert!(matches!(e, OracleError::FockCutoff { n_max: 2, .. }));
    }
}
