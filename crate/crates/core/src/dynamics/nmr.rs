//! Closed-form density matrix of the three-spin NMR system, ordered M ⊗ A ⊗ B.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::fock::qubit::{EXCITED as UP, GROUND as DOWN};
use crate::fock::{DensityMatrix, ModeSpace};

fn ket2(terms: &[(usize, usize)]) -> DVector<C64> {
    let mut v = DVector::zeros(4);
    let w = C64::new(1.0 / (terms.len() as f64).sqrt(), 0.0);
    for &(a, b) in terms {
        v[2 * a + b] += w;
    }
    v
}

/// (|↓↓> + |↑↑>)/√2
pub fn psi_plus() -> DVector<C64> {
    ket2(&[(DOWN, DOWN), (UP, UP)])
}

/// (|↓↑> + |↑↓>)/√2
pub fn phi_plus() -> DVector<C64> {
    ket2(&[(DOWN, UP), (UP, DOWN)])
}

/// |±><±| of σ_x.
fn sigma_x_projector(sign: f64) -> DMatrix<C64> {
    let h = C64::new(0.5, 0.0);
    let o = C64::new(0.5 * sign, 0.0);
    DMatrix::from_row_slice(2, 2, &[h, o, o, h])
}

/// ρ_MAB(t) under H = 4χ_s(σ_Ax + σ_Bx)σ_Mx from
/// ρ(0) = ½|φ₊><φ₊| ⊗ ρ_M+ + ½|ψ₊><ψ₊| ⊗ ρ_M−.
pub fn nmr_rho_t(chi_s: f64, t: f64) -> DensityMatrix {
    let (phi, psi) = (phi_plus(), psi_plus());
    let pp = &phi * phi.adjoint();
    let ss = &psi * psi.adjoint();
    let ps = &phi * psi.adjoint();
    let sp = &psi * phi.adjoint();
    let (mp, mm) = (sigma_x_projector(1.0), sigma_x_projector(-1.0));
    let id = DMatrix::<C64>::identity(2, 2);
    let c2 = (2.0 * chi_s * t).cos().powi(2);
    let s2 = (2.0 * chi_s * t).sin().powi(2);
    let s4 = (4.0 * chi_s * t).sin();
    let r = |x: f64| C64::new(x, 0.0);
    let mat = (mp.kronecker(&pp) + mm.kronecker(&ss)) * r(0.5 * c2)
        + (mp.kronecker(&ss) + mm.kronecker(&pp)) * r(0.5 * s2)
        + (id.kronecker(&ps) - id.kronecker(&sp)) * C64::new(0.0, 0.25 * s4);
    DensityMatrix { space: ModeSpace::qubits(3), mat }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_hamiltonian, eigh, HamiltonianSpec};

    #[test]
    fn matches_matrix_exponential() {
        let chi = 0.8;
        let spec = HamiltonianSpec::NmrSpin { chi_s: chi };
        let h = build_hamiltonian(&spec, &ModeSpace::qubits(3)).unwrap();
        let (e, v) = eigh(&h);
        let rho0 = nmr_rho_t(chi, 0.0);
        rho0.validate(1e-12).unwrap();
        for t in [0.1, 0.45, 1.3] {
            let u = &v * DMatrix::from_diagonal(&DVector::from_iterator(8, e.iter().map(|x| C64::from_polar(1.0, -x * t)))) * v.adjoint();
            let want = &u * &rho0.mat * u.adjoint();
            assert!((nmr_rho_t(chi, t).mat - want).norm() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn weights_swap_at_quarter_period() {
        let chi = 1.0;
        let t = std::f64::consts::FRAC_PI_4 / chi; // 2χt = π/2
        let rab = nmr_rho_t(chi, t).partial_trace(&[1, 2]).unwrap();
        let (phi, psi) = (phi_plus(), psi_plus());
        let w = |v: &DVector<C64>| (v.adjoint() * &rab.mat * v)[(0, 0)].re;
        assert!((w(&phi) - 0.5).abs() < 1e-12 && (w(&psi) - 0.5).abs() < 1e-12);
        let r0 = nmr_rho_t(chi, 0.0);
        let full = |v: &DVector<C64>, m: &DMatrix<C64>, rho: &DensityMatrix| {
            let k = m.kronecker(&(v * v.adjoint()));
            (k * &rho.mat).trace().re
        };
        let (mp, mm) = (sigma_x_projector(1.0), sigma_x_projector(-1.0));
        let rt = nmr_rho_t(chi, t);
        assert!((full(&phi, &mp, &r0) - 0.5).abs() < 1e-12);
        assert!(full(&phi, &mp, &rt).abs() < 1e-12);
        assert!((full(&psi, &mp, &rt) - 0.5).abs() < 1e-12);
        assert!((full(&phi, &mm, &rt) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_spin_expectations_vanish() {
        use crate::fock::{embed, qubit};
        let s = ModeSpace::qubits(3);
        for t in [0.0, 0.3, 0.9] {
            let rho = nmr_rho_t(0.7, t);
            for q in 1..3 {
                for op in [qubit::sx(), qubit::sy(), qubit::sz()] {
                    assert!((embed(&op, q, &s) * &rho.mat).trace().norm() < 1e-14);
                }
            }
        }
    }
}
