//! Least-squares fits: damped Gauss-Newton for the delay law and ordinary
//! least squares in log-log space for power laws.

use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub rss: f64,
    pub r_squared: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    /// Stop when every parameter moves by less than this relative amount.
    pub rel_step: f64,
    pub max_iter: usize,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            rel_step: 1e-10,
            max_iter: 200,
        }
    }
}

/// Solves `A x = b` for small dense systems by Gaussian elimination with
/// partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve_dense(a.to_vec(), e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

fn stats(ys: &[f64], rss: f64) -> f64 {
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let tss: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    if tss > 0.0 {
        1.0 - rss / tss
    } else if rss == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Levenberg-Marquardt with a forward-difference Jacobian.
pub fn levenberg_marquardt(
    model: impl Fn(&[f64], f64) -> f64,
    names: &[&str],
    xs: &[f64],
    ys: &[f64],
    p0: &[f64],
    opts: &LmOptions,
) -> Result<FitResult, AnalysisError> {
    let m = xs.len();
    let np = p0.len();
    if ys.len() != m || m < np || np == 0 {
        return Err(AnalysisError::InvalidData(format!("{m} points for {np} parameters")));
    }
    let residuals = |p: &[f64]| -> Vec<f64> { xs.iter().zip(ys).map(|(&x, &y)| y - model(p, x)).collect() };
    let sumsq = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let jacobian = |p: &[f64]| -> Vec<Vec<f64>> {
        // rows: points, cols: parameters; d(model)/dp
        let mut j = vec![vec![0.0; np]; m];
        for c in 0..np {
            let h = 1e-7 * p[c].abs().max(1e-12);
            let mut pp = p.to_vec();
            pp[c] += h;
            for (r, &x) in xs.iter().enumerate() {
                j[r][c] = (model(&pp, x) - model(p, x)) / h;
            }
        }
        j
    };

    let mut p = p0.to_vec();
    let mut r = residuals(&p);
    let mut rss = sumsq(&r);
    if !rss.is_finite() {
        return Err(AnalysisError::InvalidData("model not finite at the initial guess".into()));
    }
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let j = jacobian(&p);
        let mut jtj = vec![vec![0.0; np]; np];
        let mut jtr = vec![0.0; np];
        for (row, &res) in j.iter().zip(&r) {
            for a in 0..np {
                jtr[a] += row[a] * res;
                for b in 0..np {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let mut accepted = false;
        for _ in 0..50 {
            let mut damped = jtj.clone();
            for a in 0..np {
                damped[a][a] += lambda * jtj[a][a].max(1e-300);
            }
            let Some(step) = solve_dense(damped, jtr.clone()) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(&step).map(|(a, s)| a + s).collect();
            let r_trial = residuals(&trial);
            let rss_trial = sumsq(&r_trial);
            if rss_trial.is_finite() && rss_trial <= rss {
                let small = p.iter().zip(&step).all(|(a, s)| s.abs() <= opts.rel_step * a.abs().max(1e-300));
                p = trial;
                r = r_trial;
                rss = rss_trial;
                lambda = (lambda * 0.1).max(1e-15);
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            break;
        }
        if !accepted {
            // no downhill step at any damping: at a minimum to working precision
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(AnalysisError::NotConverged { iterations, last: p });
    }

    let j = jacobian(&p);
    let mut jtj = vec![vec![0.0; np]; np];
    for row in &j {
        for a in 0..np {
            for b in 0..np {
                jtj[a][b] += row[a] * row[b];
            }
        }
    }
    let dof = (m - np).max(1) as f64;
    let std_errors = match invert(&jtj) {
        Some(cov) => (0..np).map(|i| (cov[i][i] * rss / dof).max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; np],
    };
    Ok(FitResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        values: p,
        std_errors,
        rss,
        r_squared: stats(ys, rss),
        iterations,
        converged,
    })
}

/// `ln(2 / (1 + cos theta))`, the argument of the delay law.
pub fn delay_log_term(theta: f64) -> f64 {
    (2.0 / (1.0 + theta.cos())).ln()
}

/// Fits `t_d = (2 / Gamma) ln(2 / (1 + cos theta)) + t0` to `(theta, t_d)`
/// pairs. `Gamma` is returned in 1/s.
pub fn fit_delay_model(points: &[(f64, f64)]) -> Result<FitResult, AnalysisError> {
    if points.len() < 4 {
        return Err(AnalysisError::InvalidData(format!("need at least 4 points, got {}", points.len())));
    }
    if let Some(&(th, _)) = points.iter().find(|(th, td)| !(*th > 0.0 && *th < std::f64::consts::PI) || !td.is_finite()) {
        return Err(AnalysisError::InvalidData(format!("theta = {th} outside (0, pi) or non-finite delay")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    // the model is linear in 1/Gamma: start from the OLS solution
    let us: Vec<f64> = xs.iter().map(|&t| delay_log_term(t)).collect();
    let (slope, intercept) = ols(&us, &ys).ok_or(AnalysisError::Singular)?;
    if !(slope > 0.0) {
        return Err(AnalysisError::InvalidData("delays do not grow with tip angle".into()));
    }
    levenberg_marquardt(
        |p, th| 2.0 / p[0] * delay_log_term(th) + p[1],
        &["gamma_per_s", "t0_s"],
        &xs,
        &ys,
        &[2.0 / slope, intercept],
        &LmOptions::default(),
    )
}

fn ols(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// `y = prefactor * x^exponent` by OLS on `(ln x, ln y)`; R² in log space.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<FitResult, AnalysisError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(AnalysisError::InvalidData("need at least 2 paired points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(AnalysisError::InvalidData("power-law fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (slope, intercept) = ols(&lx, &ly).ok_or(AnalysisError::Singular)?;
    let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let dof = (n - 2.0).max(1.0);
    let s2 = rss / dof;
    let se_slope = (s2 / sxx).sqrt();
    let se_int = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    let prefactor = intercept.exp();
    Ok(FitResult {
        names: vec!["exponent".into(), "prefactor".into()],
        values: vec![slope, prefactor],
        std_errors: vec![se_slope, prefactor * se_int],
        rss,
        r_squared: stats(&ly, rss),
        iterations: 1,
        converged: true,
    })
}
