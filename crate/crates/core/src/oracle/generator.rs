//! Rotating-frame Tavis-Cummings Hamiltonian
//! `H = Ds S_z + Dc a^dag a + g (a^dag S- + a S+) + V (a^dag + a)`.

use num_complex::Complex64;

use super::basis::DickeFockBasis;
use super::sparse::CsrMatrix;
use crate::params::PhysicalParams;

#[derive(Debug, Clone, PartialEq)]
pub struct TcGenerator {
    pub basis: DickeFockBasis,
    pub hamiltonian: CsrMatrix,
}

pub fn build_tc_generator(basis: &DickeFockBasis, params: &PhysicalParams, drive_amplitude: f64) -> TcGenerator {
    let ds = params.spin_detuning();
    let dc = params.cavity_detuning();
    let g = params.coupling_g;
    let v = drive_amplitude;
    let c = |x: f64| Complex64::new(x, 0.0);
    let rows = (0..basis.dimension())
        .map(|r| {
            let (m, n) = basis.split(r);
            let nf = n as f64;
            let mut row = Vec::with_capacity(5);
            row.push((r, c(ds * basis.m_value(m) + dc * nf)));
            // <M, n| a^dag S- |M+1, n-1>
            if n > 0 && m < basis.two_s {
                row.push((basis.index(m + 1, n - 1), c(g * nf.sqrt() * basis.s_minus_element(m + 1))));
            }
            // <M, n| a S+ |M-1, n+1>
            if n < basis.n_max && m > 0 {
                row.push((basis.index(m - 1, n + 1), c(g * (nf + 1.0).sqrt() * basis.s_plus_element(m - 1))));
            }
            if n > 0 {
                row.push((basis.index(m, n - 1), c(v * nf.sqrt())));
            }
            if n < basis.n_max {
                row.push((basis.index(m, n + 1), c(v * (nf + 1.0).sqrt())));
            }
            row
        })
        .collect();
    TcGenerator {
        basis: *basis,
        hamiltonian: CsrMatrix::from_rows(rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params() -> PhysicalParams {
        let mut p = PhysicalParams::paper_2016().lossless();
        p.coupling_g = 1.0;
        p.n_spins = 1.0;
        p
    }

    #[test]
    fn jaynes_cummings_block() {
        let b = DickeFockBasis::new(1, 1).unwrap();
        let h = build_tc_generator(&b, &unit_params(), 0.0).hamiltonian;
        // |down, 1> and |up, 0>
        let i = b.index(0, 1);
        let j = b.index(1, 0);
        assert_eq!(h.get(i, j).re, 1.0);
        assert_eq!(h.get(j, i).re, 1.0);
        assert_eq!(h.get(i, i).re, 0.0);
        assert_eq!(h.get(j, j).re, 0.0);
    }

    #[test]
    fn hermitian_and_sparse() {
        let mut p = unit_params();
        p.omega_s += 0.3;
        p.omega_c -= 0.2;
        let b = DickeFockBasis::new(6, 7).unwrap();
        let h = build_tc_generator(&b, &p, 0.7).hamiltonian;
        assert!(h.is_hermitian());
        assert!(h.max_row_nnz() <= 5);
    }

    #[test]
    fn resonant_undriven_conserves_excitations() {
        let b = DickeFockBasis::new(4, 6).unwrap();
        let h = build_tc_generator(&b, &unit_params(), 0.0).hamiltonian;
        let exc = |i: usize| {
            let (m, n) = b.split(i);
            m + n
        };
        for r in 0..b.dimension() {
            for (c, _) in h.row(r) {
                // the truncated top level only couples within its own block as well
                assert_eq!(exc(r), exc(c));
            }
        }
    }
}
