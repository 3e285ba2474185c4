//! Superradiant emission from the fully inverted Dicke state in the
//! bad-cavity regime, where the cavity can be eliminated and each spin
//! decays at `Γ₁ = 2 g² / κ` (κ is the field amplitude decay rate).

use pseudospin::oracle::{
    build_tc_generator, evolve_exact, exact_delay_statistics, DickeFockBasis, DissipationRates, OracleOptions, QuantumState,
    TimeGrid,
};
use pseudospin::PhysicalParams;

/// Resonant parameters in rad/s with all cavity loss external.
fn bad_cavity(g: f64, kappa: f64, n_spins: f64) -> PhysicalParams {
    let mut p = PhysicalParams::paper_2016().lossless();
    p.coupling_g = g;
    p.n_spins = n_spins;
    p.kappa_ext = kappa;
    p
}

fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

#[test]
fn single_spin_decays_at_purcell_rate() {
    let (g, kappa) = (1.0, 20.0);
    let gamma_1 = 2.0 * g * g / kappa;
    let p = bad_cavity(g, kappa, 1.0);
    let basis = DickeFockBasis::new(1, 3).unwrap();
    let up = QuantumState::dicke_fock(&basis, 1, 0).unwrap().to_density();
    let tr = evolve_exact(
        &up,
        &build_tc_generator(&basis, &p, 0.0),
        &DissipationRates::from_params(&p),
        &TimeGrid::new(40.0, 0.01).unwrap(),
        &OracleOptions::default(),
    )
    .unwrap();
    // excited population after the 1/κ transient
    let pop = |t: f64| tr.s_z[(t / 0.01).round() as usize] + 0.5;
    let rate = (pop(5.0) / pop(35.0)).ln() / 30.0;
    assert!((rate / gamma_1 - 1.0).abs() < 0.2, "{rate} vs {gamma_1}");
    // the maximum emission rate is reached within a few cavity lifetimes,
    // not after 1/Γ₁
    let stats = exact_delay_statistics(1, 3, &p, &TimeGrid::new(20.0, 0.001).unwrap(), &OracleOptions::default()).unwrap();
    assert!(stats.delay < 0.5 / gamma_1, "{}", stats.delay);
    // half the population is gone after ln 2 / Γ₁
    let half = stats.half_inversion.unwrap();
    assert!((half * gamma_1 / std::f64::consts::LN_2 - 1.0).abs() < 0.02, "{half}");
}

#[test]
fn half_inversion_time_follows_harmonic_sum() {
    let (g, kappa) = (1.0, 40.0);
    let gamma_1 = 2.0 * g * g / kappa;
    let grid = TimeGrid::new(40.0, 0.01).unwrap();
    let stats = |two_s: usize| {
        let p = bad_cavity(g, kappa, two_s as f64);
        exact_delay_statistics(two_s, 6, &p, &grid, &OracleOptions::default()).unwrap()
    };
    let (s2, s4) = (stats(4), stats(8));
    let (h2, h4) = (s2.half_inversion.unwrap(), s4.half_inversion.unwrap());
    let measured = h2 / h4;
    let predicted = (harmonic(4) / 4.0) / (harmonic(8) / 8.0);
    assert!((measured / predicted - 1.0).abs() < 0.25, "ratio {measured} vs {predicted}");
    // mean passage time down the Dicke ladder to M = 0, rates Γ₁ k (N - k + 1)
    let cascade = |n: usize| (1..=n / 2).map(|k| 1.0 / (gamma_1 * (k * (n - k + 1)) as f64)).sum::<f64>();
    assert!((h4 / cascade(8) - 1.0).abs() < 0.1, "{h4} vs {}", cascade(8));
    // the emission peak is broad at these sizes and barely moves with N
    assert!((s2.delay / s4.delay - 1.0).abs() < 0.25, "{} vs {}", s2.delay, s4.delay);
}

#[test]
fn delay_depends_only_on_purcell_rate_in_bad_cavity_limit() {
    let grid = TimeGrid::new(40.0, 0.01).unwrap();
    let stats = |g: f64, kappa: f64| {
        let p = bad_cavity(g, kappa, 4.0);
        exact_delay_statistics(4, 6, &p, &grid, &OracleOptions::default()).unwrap()
    };
    let (a, b) = (stats(1.0, 40.0), stats(2.0, 160.0));
    assert!((a.delay / b.delay - 1.0).abs() < 0.1, "{} vs {}", a.delay, b.delay);
    let (ha, hb) = (a.half_inversion.unwrap(), b.half_inversion.unwrap());
    assert!((ha / hb - 1.0).abs() < 0.1, "{ha} vs {hb}");
}
