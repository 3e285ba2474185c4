//! Pure states and density matrices over a [`DickeFockBasis`].

use num_complex::Complex64;

use super::basis::DickeFockBasis;
use super::OracleError;

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure { basis: DickeFockBasis, amplitudes: Vec<Complex64> },
    /// Row-major `d x d`.
    Density { basis: DickeFockBasis, rho: Vec<Complex64> },
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let ln_fact = |m: usize| (1..=m).map(|x| (x as f64).ln()).sum::<f64>();
    ln_fact(n) - ln_fact(k) - ln_fact(n - k)
}

fn normalize(v: &mut [Complex64]) -> Result<(), OracleError> {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(OracleError::InvalidState("zero vector".into()));
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(())
}

impl QuantumState {
    pub fn basis(&self) -> &DickeFockBasis {
        match self {
            Self::Pure { basis, .. } | Self::Density { basis, .. } => basis,
        }
    }

    /// Tensor product of spin amplitudes (indexed by `M + S`) and Fock
    /// amplitudes; the result is normalized.
    pub fn product(basis: &DickeFockBasis, spin: &[Complex64], fock: &[Complex64]) -> Result<Self, OracleError> {
        if spin.len() != basis.spin_dim() || fock.len() != basis.fock_dim() {
            return Err(OracleError::InvalidState(format!(
                "factor lengths {}x{} do not match basis {}x{}",
                spin.len(),
                fock.len(),
                basis.spin_dim(),
                basis.fock_dim()
            )));
        }
        let mut amplitudes: Vec<Complex64> = spin.iter().flat_map(|s| fock.iter().map(move |f| s * f)).collect();
        normalize(&mut amplitudes)?;
        Ok(Self::Pure {
            basis: *basis,
            amplitudes,
        })
    }

    /// `|S, M> (x) |n>` with `m_idx = M + S`.
    pub fn dicke_fock(basis: &DickeFockBasis, m_idx: usize, n: usize) -> Result<Self, OracleError> {
        if m_idx > basis.two_s || n > basis.n_max {
            return Err(OracleError::InvalidState(format!("level (m_idx={m_idx}, n={n}) outside basis")));
        }
        let mut amplitudes = vec![Complex64::default(); basis.dimension()];
        amplitudes[basis.index(m_idx, n)] = Complex64::new(1.0, 0.0);
        Ok(Self::Pure {
            basis: *basis,
            amplitudes,
        })
    }

    /// Truncated coherent field amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)`.
    pub fn coherent_amplitudes(basis: &DickeFockBasis, alpha: Complex64) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(basis.fock_dim());
        let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..basis.fock_dim() {
            if n > 0 {
                c *= alpha / (n as f64).sqrt();
            }
            out.push(c);
        }
        out
    }

    /// Spin coherent state tipped by `theta` from `|S, -S>` with azimuth
    /// `phi`, so that `<S-> = S sin(theta) e^{i phi}`.
    pub fn spin_coherent_amplitudes(basis: &DickeFockBasis, theta: f64, phi: f64) -> Vec<Complex64> {
        let two_s = basis.two_s;
        let (s2, c2) = ((0.5 * theta).sin(), (0.5 * theta).cos());
        (0..=two_s)
            .map(|k| {
                // k = S + M spins up
                let mag = if (k > 0 && s2 == 0.0) || (k < two_s && c2 == 0.0) {
                    0.0
                } else {
                    let ln = 0.5 * ln_binomial(two_s, k)
                        + if k > 0 { k as f64 * s2.abs().ln() } else { 0.0 }
                        + if k < two_s { (two_s - k) as f64 * c2.abs().ln() } else { 0.0 };
                    let sign = s2.signum().powi(k as i32) * c2.signum().powi((two_s - k) as i32);
                    sign * ln.exp()
                };
                Complex64::from_polar(mag, k as f64 * phi)
            })
            .collect()
    }

    pub fn vacuum_amplitudes(basis: &DickeFockBasis) -> Vec<Complex64> {
        let mut v = vec![Complex64::default(); basis.fock_dim()];
        v[0] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn to_density(&self) -> Self {
        match self {
            Self::Density { .. } => self.clone(),
            Self::Pure { basis, amplitudes } => {
                let d = amplitudes.len();
                let mut rho = vec![Complex64::default(); d * d];
                for i in 0..d {
                    for j in 0..d {
                        rho[i * d + j] = amplitudes[i] * amplitudes[j].conj();
                    }
                }
                Self::Density { basis: *basis, rho }
            }
        }
    }

    /// Norm squared of a pure state or trace of a density matrix.
    pub fn trace(&self) -> f64 {
        match self {
            Self::Pure { amplitudes, .. } => amplitudes.iter().map(|a| a.norm_sqr()).sum(),
            Self::Density { basis, rho } => {
                let d = basis.dimension();
                (0..d).map(|i| rho[i * d + i].re).sum()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_state_mean_photon_number() {
        let b = DickeFockBasis::new(1, 60).unwrap();
        let f = QuantumState::coherent_amplitudes(&b, Complex64::new(4.0, 0.0));
        let norm: f64 = f.iter().map(|x| x.norm_sqr()).sum();
        let mean: f64 = f.iter().enumerate().map(|(n, x)| n as f64 * x.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!((mean - 16.0).abs() < 1e-9);
    }

    #[test]
    fn spin_coherent_expectations() {
        let b = DickeFockBasis::new(8, 0).unwrap();
        let theta = 1.1;
        let phi = 0.4;
        let c = QuantumState::spin_coherent_amplitudes(&b, theta, phi);
        let s = b.total_spin();
        let norm: f64 = c.iter().map(|x| x.norm_sqr()).sum();
        let sz: f64 = c.iter().enumerate().map(|(k, x)| b.m_value(k) * x.norm_sqr()).sum();
        let sm: Complex64 = (1..=b.two_s).map(|k| c[k - 1].conj() * b.s_minus_element(k) * c[k]).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!((sz + s * theta.cos()).abs() < 1e-12);
        assert!((sm - Complex64::from_polar(s * theta.sin(), phi)).norm() < 1e-12);
    }

    #[test]
    fn poles_are_dicke_states() {
        let b = DickeFockBasis::new(5, 0).unwrap();
        let down = QuantumState::spin_coherent_amplitudes(&b, 0.0, 0.0);
        assert_eq!(down[0].re, 1.0);
        let up = QuantumState::spin_coherent_amplitudes(&b, std::f64::consts::PI, 0.0);
        assert!((up[5].norm() - 1.0).abs() < 1e-12);
        assert!(up[..5].iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn density_trace() {
        let b = DickeFockBasis::new(2, 3).unwrap();
        let s = QuantumState::product(
            &b,
            &QuantumState::spin_coherent_amplitudes(&b, 0.3, 0.0),
            &QuantumState::coherent_amplitudes(&b, Complex64::new(0.5, 0.2)),
        )
        .unwrap();
        assert!((s.trace() - 1.0).abs() < 1e-14);
        assert!((s.to_density().trace() - 1.0).abs() < 1e-14);
    }
}
