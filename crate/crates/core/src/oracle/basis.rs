//! Product basis `|S, M> (x) |n>` of the symmetric spin sector and a
//! truncated Fock space.

use serde::{Deserialize, Serialize};

use super::OracleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DickeFockBasis {
    /// `2S`, i.e. the number of spins in the symmetric sector.
    pub two_s: usize,
    pub n_max: usize,
}

impl DickeFockBasis {
    pub fn new(two_s: usize, n_max: usize) -> Result<Self, OracleError> {
        if two_s == 0 {
            return Err(OracleError::InvalidBasis("need at least one spin (2S >= 1)".into()));
        }
        Ok(Self { two_s, n_max })
    }

    pub fn total_spin(&self) -> f64 {
        0.5 * self.two_s as f64
    }

    pub fn spin_dim(&self) -> usize {
        self.two_s + 1
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dimension(&self) -> usize {
        self.spin_dim() * self.fock_dim()
    }

    /// `m_idx = M + S` in `0..=2S`.
    #[inline]
    pub fn index(&self, m_idx: usize, n: usize) -> usize {
        m_idx * self.fock_dim() + n
    }

    /// Inverse of [`index`](Self::index).
    #[inline]
    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / self.fock_dim(), i % self.fock_dim())
    }

    #[inline]
    pub fn m_value(&self, m_idx: usize) -> f64 {
        m_idx as f64 - self.total_spin()
    }

    /// `<M+1| S+ |M>`.
    #[inline]
    pub fn s_plus_element(&self, m_idx: usize) -> f64 {
        let s = self.total_spin();
        let m = self.m_value(m_idx);
        (s * (s + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
    }

    /// `<M-1| S- |M>`.
    #[inline]
    pub fn s_minus_element(&self, m_idx: usize) -> f64 {
        let s = self.total_spin();
        let m = self.m_value(m_idx);
        (s * (s + 1.0) - m * (m - 1.0)).max(0.0).sqrt()
    }
}
