//! Closed-form low-excitation solution: with `S_z` frozen at `-N/2` the
//! field and the coherence form two driven, damped, coupled linear
//! oscillators.

use num_complex::Complex64;

use super::drive::DriveEnvelope;
use super::SemiclassicalError;
use crate::params::PhysicalParams;
use crate::state::SemiclassicalState;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

type Mat2 = [[Complex64; 2]; 2];
type Vec2 = [Complex64; 2];

fn mat_vec(m: &Mat2, x: &Vec2) -> Vec2 {
    [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
}

/// `exp(M t)` via Cayley-Hamilton for a 2x2 matrix.
fn expm(m: &Mat2, t: f64) -> Mat2 {
    let mu = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let q = (mu * mu - det).sqrt();
    let qt = q * t;
    let c = qt.cosh();
    // sinh(qt)/q without cancellation for small qt
    let s = if qt.norm() < 1e-4 {
        t * (1.0 + qt * qt / 6.0)
    } else {
        qt.sinh() / q
    };
    let e = (mu * t).exp();
    [
        [e * (c + s * (m[0][0] - mu)), e * s * m[0][1]],
        [e * s * m[1][0], e * (c + s * (m[1][1] - mu))],
    ]
}

fn solve(m: &Mat2, b: &Vec2) -> Option<Vec2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.norm() == 0.0 {
        return None;
    }
    Some([
        (m[1][1] * b[0] - m[0][1] * b[1]) / det,
        (m[0][0] * b[1] - m[1][0] * b[0]) / det,
    ])
}

/// `(a(t), s_-(t))` of the linearized system, physical units, starting from
/// `initial` at `t = 0`. `s_z` of the initial state is ignored.
pub fn linearized_response(
    params: &PhysicalParams,
    drive: &DriveEnvelope,
    initial: &SemiclassicalState,
    times: &[f64],
) -> Result<Vec<(Complex64, Complex64)>, SemiclassicalError> {
    params.validate()?;
    let sqrt_n = params.n_spins.sqrt();
    let n = params.n_spins;
    let big_g = params.collective_coupling();
    let m: Mat2 = [
        [-(params.kappa_total() + I * params.cavity_detuning()), -I * big_g],
        [-I * big_g, -(params.gamma + I * params.spin_detuning())],
    ];

    let mut edges: Vec<f64> = drive.breakpoints().into_iter().filter(|&t| t > 0.0).collect();
    edges.insert(0, 0.0);
    // state at the start of each piece, and the particular solution on it
    let mut starts: Vec<(f64, Vec2, Vec2)> = Vec::with_capacity(edges.len());
    let mut x: Vec2 = [initial.a / sqrt_n, initial.s_minus / n];
    for (i, &t0) in edges.iter().enumerate() {
        if i > 0 {
            let (tp, xp, pp) = starts[i - 1];
            x = propagate(&m, &xp, &pp, t0 - tp);
        }
        let b: Vec2 = [-I * drive.value_at(t0) / sqrt_n, Complex64::default()];
        let p = solve(&m, &b).ok_or_else(|| SemiclassicalError::Singular("coupling matrix is singular".into()))?;
        starts.push((t0, x, p));
    }

    Ok(times
        .iter()
        .map(|&t| {
            let i = edges.partition_point(|&e| e <= t).saturating_sub(1);
            let (t0, x0, p) = starts[i];
            let x = propagate(&m, &x0, &p, t - t0);
            (x[0] * sqrt_n, x[1] * n)
        })
        .collect())
}

/// `x(t) = e^{Mt}(x0 + M^-1 b) - M^-1 b` where `p = M^-1 b`.
fn propagate(m: &Mat2, x0: &Vec2, p: &Vec2, t: f64) -> Vec2 {
    let e = expm(m, t);
    let y = mat_vec(&e, &[x0[0] + p[0], x0[1] + p[1]]);
    [y[0] - p[0], y[1] - p[1]]
}
