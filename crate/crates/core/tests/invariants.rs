//! Property tests of physical invariants across random states and parameters.

use num_complex::Complex64;
use proptest::prelude::*;

use pseudospin::integrator::IntegratorConfig;
use pseudospin::oracle::{build_tc_generator, evolve_exact, DickeFockBasis, DissipationRates, OracleOptions, QuantumState, TimeGrid};
use pseudospin::semiclassical::{run_fid, simulate, DriveEnvelope, FidExperiment};
use pseudospin::{PhysicalParams, SemiclassicalState};

fn initial(n: f64, theta: f64, phi: f64, re: f64, im: f64) -> SemiclassicalState {
    let mut s = SemiclassicalState::tipped(n, theta, phi);
    s.a = Complex64::new(re, im) * n.sqrt();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lossless_dynamics_conserve_radius_and_excitation(
        log_n in 10.0..14.0f64,
        theta in 0.0..std::f64::consts::PI,
        phi in 0.0..std::f64::consts::TAU,
        re in -0.5..0.5f64,
        im in -0.5..0.5f64,
        detuning in -1e6..1e6f64,
    ) {
        let mut p = PhysicalParams::paper_2016().with_n_spins(10f64.powf(log_n)).lossless();
        p.omega_s += detuning;
        let s0 = initial(p.n_spins, theta, phi, re, im);
        let tr = simulate(&p, &DriveEnvelope::none(), &s0, 5e-6, &IntegratorConfig::new(5e-9)).unwrap();
        let half = 0.5 * p.n_spins;
        let e0 = s0.photon_number() + s0.s_z;
        for k in 0..tr.len() {
            let s = tr.state(k);
            prop_assert!((s.bloch_radius() - half).abs() / half < 1e-8);
            prop_assert!((s.photon_number() + s.s_z - e0).abs() / half < 1e-8);
        }
    }

    #[test]
    fn dephasing_never_grows_the_bloch_radius(
        theta in 0.1..3.0f64,
        phi in 0.0..std::f64::consts::TAU,
        re in -0.5..0.5f64,
    ) {
        let p = PhysicalParams::paper_2016();
        let s0 = initial(p.n_spins, theta, phi, re, 0.0);
        let tr = simulate(&p, &DriveEnvelope::none(), &s0, 10e-6, &IntegratorConfig::new(5e-9)).unwrap();
        let half = 0.5 * p.n_spins;
        for k in 1..tr.len() {
            prop_assert!(tr.state(k).bloch_radius() <= tr.state(k - 1).bloch_radius() + 1e-9 * half);
        }
    }

    #[test]
    fn drive_phase_rotates_the_whole_response(amp in 1e6..6e6f64, dphi in 0.0..std::f64::consts::TAU) {
        let p = PhysicalParams::paper_2016();
        let drive = DriveEnvelope::rectangular(amp * p.n_spins.sqrt(), 200e-9, 0.0).unwrap();
        let mut exp = FidExperiment::new(p, drive.clone());
        exp.t_total = 5e-6;
        let base = run_fid(&exp).unwrap();
        exp.drive = drive.phase_shifted(dphi);
        let shifted = run_fid(&exp).unwrap();
        let rot = Complex64::from_polar(1.0, dphi);
        let scale = base.abs_a().into_iter().fold(0.0, f64::max);
        for k in 0..base.len() {
            prop_assert!((shifted.a[k] - base.a[k] * rot).norm() < 1e-7 * scale);
            prop_assert!((shifted.s_z[k] - base.s_z[k]).abs() < 1e-7 * p.n_spins);
        }
    }

    #[test]
    fn lindblad_evolution_preserves_trace_and_positivity_of_populations(
        two_s in 1usize..5,
        theta in 0.0..std::f64::consts::PI,
        alpha in 0.0..1.0f64,
        kappa in 0.0..0.5f64,
        gamma in 0.0..0.5f64,
    ) {
        let mut p = PhysicalParams::paper_2016().lossless();
        p.coupling_g = 1.0;
        p.n_spins = two_s as f64;
        let basis = DickeFockBasis::new(two_s, two_s + 16).unwrap();
        let rho = QuantumState::product(
            &basis,
            &QuantumState::spin_coherent_amplitudes(&basis, theta, 0.0),
            &QuantumState::coherent_amplitudes(&basis, Complex64::new(alpha, 0.0)),
        )
        .unwrap()
        .to_density();
        let tr = evolve_exact(
            &rho,
            &build_tc_generator(&basis, &p, 0.0),
            &DissipationRates { kappa, gamma },
            &TimeGrid::new(3.0, 0.05).unwrap(),
            &OracleOptions::default(),
        )
        .unwrap();
        for k in 0..tr.times.len() {
            prop_assert!((tr.trace_norm[k] - 1.0).abs() < 1e-9);
            prop_assert!(tr.photons[k] > -1e-10);
            prop_assert!(tr.s_z[k].abs() <= 0.5 * two_s as f64 + 1e-9);
        }
        // excitation only leaks out through the cavity
        let exc = tr.excitation();
        for w in exc.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
    }
}
