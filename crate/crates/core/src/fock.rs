//! Truncated Fock (and qubit) spaces, pure states and density matrices.
//!
//! Multi-indices are row-major over `dims`, subsystem 0 slowest: for dims [dA, dB]
//! the basis vector |i, j> sits at flat index i*dB + j.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_factorial, ln_laguerre_neg};

/// Largest density matrix we agree to materialize (entries).
pub const MAX_DENSITY_ENTRIES: usize = 1 << 22;

/// Tail mass beyond the cutoff that constructors tolerate before failing.
pub const TRUNCATION_LIMIT: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSpace {
    dims: Vec<usize>,
}

impl ModeSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d < 2) {
            return Err(Error::Dimension(format!("every subsystem needs dim >= 2, got {dims:?}")));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Dimension("total dimension overflows".into()))?;
        Ok(Self { dims })
    }

    /// Single mode with Fock states 0..=cutoff.
    pub fn fock(cutoff: usize) -> Self {
        Self::new(vec![cutoff + 1]).expect("cutoff >= 1")
    }

    pub fn two_mode(cutoff_a: usize, cutoff_b: usize) -> Self {
        Self::new(vec![cutoff_a + 1, cutoff_b + 1]).expect("cutoffs >= 1")
    }

    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n]).expect("n >= 1")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    /// Highest retained Fock index of subsystem `i`.
    pub fn cutoff(&self, i: usize) -> usize {
        self.dims[i] - 1
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dims.len());
        multi.iter().zip(&self.dims).fold(0, |acc, (&m, &d)| acc * d + m)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = flat % d;
            flat /= d;
        }
        out
    }

    pub fn concat(&self, other: &ModeSpace) -> ModeSpace {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        ModeSpace { dims }
    }

    pub fn subspace(&self, keep: &[usize]) -> ModeSpace {
        ModeSpace { dims: keep.iter().map(|&k| self.dims[k]).collect() }
    }

    fn check_density_size(&self) -> Result<()> {
        let n = self.total_dim();
        if n.saturating_mul(n) > MAX_DENSITY_ENTRIES {
            return Err(Error::Dimension(format!(
                "density matrix of dimension {n} exceeds {MAX_DENSITY_ENTRIES} entries"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PureState {
    pub space: ModeSpace,
    pub amps: DVector<C64>,
}

impl PureState {
    /// Wraps amplitudes, normalizing them. Fails on a zero vector or wrong length.
    pub fn new(space: ModeSpace, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != space.total_dim() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a space of dimension {}",
                amps.len(),
                space.total_dim()
            )));
        }
        let norm = amps.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Parameter("state vector has zero or non-finite norm".into()));
        }
        Ok(Self { space, amps: amps / C64::new(norm, 0.0) })
    }

    pub fn basis(space: ModeSpace, multi: &[usize]) -> Result<Self> {
        if multi.len() != space.n_subsystems() || multi.iter().zip(space.dims()).any(|(&m, &d)| m >= d) {
            return Err(Error::Dimension(format!("basis index {multi:?} outside {:?}", space.dims())));
        }
        let mut amps = DVector::zeros(space.total_dim());
        amps[space.flat_index(multi)] = C64::new(1.0, 0.0);
        Ok(Self { space, amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        self.space.check_density_size()?;
        Ok(DensityMatrix { space: self.space.clone(), mat: &self.amps * self.amps.adjoint() })
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// Reduced density matrix of the kept subsystems, straight from the amplitudes.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (kept, traced) = split_indices(&self.space, keep)?;
        let dk: usize = kept.iter().map(|&k| self.space.dims[k]).product();
        let dt: usize = traced.iter().map(|&k| self.space.dims[k]).product();
        let table = index_table(&self.space, &kept, &traced);
        let m = DMatrix::from_fn(dk, dt, |a, t| self.amps[table[a * dt + t]]);
        let rho = &m * m.adjoint();
        Ok(DensityMatrix { space: self.space.subspace(&kept), mat: rho })
    }

    /// Mean photon number of subsystem `mode`.
    pub fn mean_number(&self, mode: usize) -> f64 {
        (0..self.dim())
            .map(|i| self.space.multi_index(i)[mode] as f64 * self.amps[i].norm_sqr())
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub space: ModeSpace,
    pub mat: DMatrix<C64>,
}

impl DensityMatrix {
    /// Wraps a matrix and checks Hermiticity, unit trace and positivity to `tol`.
    pub fn new(space: ModeSpace, mat: DMatrix<C64>, tol: f64) -> Result<Self> {
        space.check_density_size()?;
        let n = space.total_dim();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for a space of dimension {n}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let rho = Self { space, mat };
        rho.validate(tol)?;
        Ok(rho)
    }

    pub fn from_pure(psi: &PureState) -> Result<Self> {
        psi.to_density()
    }

    pub fn maximally_mixed(space: ModeSpace) -> Result<Self> {
        space.check_density_size()?;
        let n = space.total_dim();
        Ok(Self { mat: DMatrix::identity(n, n) * C64::new(1.0 / n as f64, 0.0), space })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().cloned().collect()
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let h = self.hermiticity_error();
        if h > tol {
            return Err(Error::InvalidDensity(format!("not Hermitian (max deviation {h:.3e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidDensity(format!("trace {:.12} != 1", tr.re)));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -tol.max(1e-9) {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (kept, traced) = split_indices(&self.space, keep)?;
        let dk: usize = kept.iter().map(|&k| self.space.dims[k]).product();
        let dt: usize = traced.iter().map(|&k| self.space.dims[k]).product();
        let table = index_table(&self.space, &kept, &traced);
        let out = DMatrix::from_fn(dk, dk, |a, b| {
            (0..dt).map(|t| self.mat[(table[a * dt + t], table[b * dt + t])]).sum()
        });
        Ok(DensityMatrix { space: self.space.subspace(&kept), mat: out })
    }

    /// Partial transpose on the listed subsystems.
    pub fn partial_transpose(&self, subsystems: &[usize]) -> Result<DMatrix<C64>> {
        for &s in subsystems {
            if s >= self.space.n_subsystems() {
                return Err(Error::Subsystem { index: s, count: self.space.n_subsystems() });
            }
        }
        let n = self.dim();
        let multi: Vec<Vec<usize>> = (0..n).map(|i| self.space.multi_index(i)).collect();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (mut mi, mut mj) = (multi[i].clone(), multi[j].clone());
                for &s in subsystems {
                    std::mem::swap(&mut mi[s], &mut mj[s]);
                }
                out[(self.space.flat_index(&mi), self.space.flat_index(&mj))] = self.mat[(i, j)];
            }
        }
        Ok(out)
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// <psi|rho|psi>
    pub fn overlap(&self, psi: &PureState) -> f64 {
        (psi.amps.adjoint() * &self.mat * &psi.amps)[(0, 0)].re
    }
}

fn split_indices(space: &ModeSpace, keep: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let count = space.n_subsystems();
    if keep.is_empty() {
        return Err(Error::Parameter("partial trace needs a nonempty keep set".into()));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= count) {
        return Err(Error::Subsystem { index: bad, count });
    }
    let traced = (0..count).filter(|k| !kept.contains(k)).collect();
    Ok((kept, traced))
}

/// table[a * dt + t] = flat index of the basis state with kept part a and traced part t.
fn index_table(space: &ModeSpace, kept: &[usize], traced: &[usize]) -> Vec<usize> {
    let kdims: Vec<usize> = kept.iter().map(|&k| space.dims[k]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&k| space.dims[k]).collect();
    let dk: usize = kdims.iter().product();
    let dt: usize = tdims.iter().product();
    let kspace = ModeSpace { dims: kdims };
    let tspace = ModeSpace { dims: tdims };
    let mut table = vec![0; dk * dt];
    let mut multi = vec![0; space.n_subsystems()];
    for a in 0..dk {
        let ma = if kept.is_empty() { vec![] } else { kspace.multi_index(a) };
        for t in 0..dt {
            let mt = if traced.is_empty() { vec![] } else { tspace.multi_index(t) };
            for (slot, &k) in kept.iter().enumerate() {
                multi[k] = ma[slot];
            }
            for (slot, &k) in traced.iter().enumerate() {
                multi[k] = mt[slot];
            }
            table[a * dt + t] = space.flat_index(&multi);
        }
    }
    table
}

fn require_single_mode(space: &ModeSpace) -> Result<usize> {
    if space.n_subsystems() != 1 {
        return Err(Error::Dimension(format!("expected a single mode, got dims {:?}", space.dims())));
    }
    Ok(space.cutoff(0))
}

fn check_tail(kept: f64) -> Result<()> {
    let lost = 1.0 - kept;
    if lost > TRUNCATION_LIMIT {
        return Err(Error::Truncation { lost, limit: TRUNCATION_LIMIT });
    }
    Ok(())
}

/// Coherent state |alpha>, truncated at the cutoff and renormalized.
pub fn make_coherent(alpha: C64, space: &ModeSpace) -> Result<PureState> {
    make_pacs(alpha, 0, space)
}

/// m-photon-added coherent state a†^m|alpha> / sqrt(m! L_m(-|alpha|^2)).
pub fn make_pacs(alpha: C64, m: usize, space: &ModeSpace) -> Result<PureState> {
    let nmax = require_single_mode(space)?;
    if m > nmax {
        return Err(Error::Dimension(format!("m = {m} exceeds cutoff {nmax}")));
    }
    let y = alpha.norm_sqr();
    let ln_norm = -0.5 * y - 0.5 * (ln_factorial(m) + ln_laguerre_neg(m, y));
    let (r, phi) = (alpha.norm(), alpha.arg());
    let mut amps = DVector::zeros(nmax + 1);
    for n in m..=nmax {
        let p = n - m;
        let ln_mag = if p == 0 {
            0.0
        } else if r == 0.0 {
            continue;
        } else {
            p as f64 * r.ln()
        };
        // alpha^p / sqrt(p!) * sqrt(n!/p!)
        let ln_c = ln_mag - ln_factorial(p) + 0.5 * ln_factorial(n) + ln_norm;
        amps[n] = C64::from_polar(ln_c.exp(), p as f64 * phi);
    }
    check_tail(amps.norm_squared())?;
    PureState::new(space.clone(), amps)
}

/// Fock state |n>.
pub fn make_fock(n: usize, space: &ModeSpace) -> Result<PureState> {
    PureState::basis(space.clone(), &[n])
}

/// Binomial state sum_n 2^{-N/2} C(N,n)^{1/2} |N-n, n> on a two-mode space.
pub fn make_binomial(n_total: usize, space: &ModeSpace) -> Result<PureState> {
    if space.n_subsystems() != 2 || n_total > space.cutoff(0) || n_total > space.cutoff(1) {
        return Err(Error::Dimension(format!(
            "binomial state with N = {n_total} needs two modes with cutoff >= N, got {:?}",
            space.dims()
        )));
    }
    let mut amps = DVector::zeros(space.total_dim());
    for n in 0..=n_total {
        let ln_c = 0.5 * crate::special::ln_binomial(n_total, n) - 0.5 * n_total as f64 * 2f64.ln();
        amps[space.flat_index(&[n_total - n, n])] = C64::new(ln_c.exp(), 0.0);
    }
    PureState::new(space.clone(), amps)
}

/// Two-mode squeezed vacuum exp(zeta* a b - zeta a† b†)|0,0>
///   = sum_n (-e^{i arg zeta} tanh|zeta|)^n / cosh|zeta| |n, n>.
pub fn make_two_mode_squeezed(zeta: C64, space: &ModeSpace) -> Result<PureState> {
    if space.n_subsystems() != 2 {
        return Err(Error::Dimension("two-mode squeezed state needs two modes".into()));
    }
    let nmax = space.cutoff(0).min(space.cutoff(1));
    let r = zeta.norm();
    let t = r.tanh();
    let tail = t.powi(2 * (nmax as i32 + 1));
    if tail > 1e-8 {
        return Err(Error::Truncation { lost: tail, limit: 1e-8 });
    }
    let ratio = -C64::from_polar(t, zeta.arg());
    let mut amps = DVector::zeros(space.total_dim());
    let mut c = C64::new(1.0 / r.cosh(), 0.0);
    for n in 0..=nmax {
        amps[space.flat_index(&[n, n])] = c;
        c *= ratio;
    }
    PureState::new(space.clone(), amps)
}

pub fn tensor_pure(a: &PureState, b: &PureState) -> PureState {
    PureState { space: a.space.concat(&b.space), amps: a.amps.kronecker(&b.amps) }
}

pub fn tensor_density(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let space = a.space.concat(&b.space);
    space.check_density_size()?;
    Ok(DensityMatrix { space, mat: a.mat.kronecker(&b.mat) })
}

/// |<psi1|psi2>|^2
pub fn fidelity(a: &PureState, b: &PureState) -> f64 {
    a.inner(b).norm_sqr()
}

/// Annihilation operator on a single mode of dimension `dim`.
pub fn destroy(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) })
}

/// Embeds a single-subsystem operator into the full space (identity elsewhere).
pub fn embed(op: &DMatrix<C64>, which: usize, space: &ModeSpace) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for (k, &d) in space.dims().iter().enumerate() {
        let factor = if k == which { op.clone() } else { DMatrix::identity(d, d) };
        out = out.kronecker(&factor);
    }
    out
}

/// Qubit operators. Basis order: index 0 = |e> (spin up), index 1 = |g> (spin down).
pub mod qubit {
    use nalgebra::DMatrix;
    use num_complex::Complex64 as C64;

    pub const EXCITED: usize = 0;
    pub const GROUND: usize = 1;

    fn m(a: [[C64; 2]; 2]) -> DMatrix<C64> {
        DMatrix::from_fn(2, 2, |i, j| a[i][j])
    }

    const O: C64 = C64::new(0.0, 0.0);
    const H: C64 = C64::new(0.5, 0.0);
    const IH: C64 = C64::new(0.0, 0.5);
    const ONE: C64 = C64::new(1.0, 0.0);

    /// ½(|e><g| + |g><e|)
    pub fn sx() -> DMatrix<C64> {
        m([[O, H], [H, O]])
    }

    /// ½i(|g><e| − |e><g|)
    pub fn sy() -> DMatrix<C64> {
        m([[O, -IH], [IH, O]])
    }

    /// ½(|e><e| − |g><g|)
    pub fn sz() -> DMatrix<C64> {
        m([[H, O], [O, -H]])
    }

    /// σ⁻ = sx − i sy = |g><e|
    pub fn lower() -> DMatrix<C64> {
        m([[O, O], [ONE, O]])
    }

    /// σ⁺ = |e><g|
    pub fn raise() -> DMatrix<C64> {
        m([[O, ONE], [O, O]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn index_round_trip() {
        let s = ModeSpace::new(vec![2, 3, 4]).unwrap();
        for i in 0..24 {
            assert_eq!(s.flat_index(&s.multi_index(i)), i);
        }
        assert_eq!(s.flat_index(&[1, 0, 0]), 12);
    }

    #[test]
    fn rejects_degenerate_dims() {
        assert!(ModeSpace::new(vec![1]).is_err());
        assert!(ModeSpace::new(vec![]).is_err());
    }

    #[test]
    fn vacuum_coherent_state() {
        let psi = make_coherent(c(0.0), &ModeSpace::fock(10)).unwrap();
        assert!((psi.amps[0] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn coherent_mean_number() {
        let psi = make_coherent(c(1.0), &ModeSpace::fock(40)).unwrap();
        assert!((psi.mean_number(0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coherent_deficit_small_at_sixty() {
        // Poisson tail beyond 60 for mean 10 is ~1e-19
        let alpha = C64::from_polar(10f64.sqrt(), std::f64::consts::FRAC_PI_4);
        let s = ModeSpace::fock(60);
        let nmax = 60;
        let y = alpha.norm_sqr();
        let kept: f64 = (0..=nmax).map(|n| (-y + n as f64 * y.ln() - ln_factorial(n)).exp()).sum();
        assert!(1.0 - kept < 1e-10);
        assert!(make_coherent(alpha, &s).is_ok());
    }

    #[test]
    fn coherent_truncation_fails_loudly() {
        let err = make_coherent(c(3.0), &ModeSpace::fock(5)).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn pacs_limits() {
        let s = ModeSpace::fock(30);
        let a = make_pacs(C64::new(0.7, 0.2), 0, &s).unwrap();
        let b = make_coherent(C64::new(0.7, 0.2), &s).unwrap();
        assert!((&a.amps - &b.amps).norm() < 1e-14);
        let one = make_pacs(c(0.0), 1, &s).unwrap();
        assert!((one.amps[1] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn pacs_mean_number_matches_laguerre_form() {
        // <n> for a†|alpha>: brute-force sum vs closed form from the generating function,
        // <n> = (|a|^4 + 3|a|^2 + 1)/(1 + |a|^2) for m = 1.
        let psi = make_pacs(c(1.0), 1, &ModeSpace::fock(40)).unwrap();
        let y = 1.0;
        let closed = (y * y + 3.0 * y + 1.0) / (1.0 + y);
        assert!((psi.mean_number(0) - closed).abs() < 1e-10);
    }

    #[test]
    fn binomial_small_cases() {
        let s = ModeSpace::two_mode(3, 3);
        let b0 = make_binomial(0, &s).unwrap();
        assert!((b0.amps[0] - c(1.0)).norm() < 1e-15);
        let b1 = make_binomial(1, &s).unwrap();
        let h = 0.5f64.sqrt();
        assert!((b1.amps[s.flat_index(&[1, 0])] - c(h)).norm() < 1e-15);
        assert!((b1.amps[s.flat_index(&[0, 1])] - c(h)).norm() < 1e-15);
        let ev = b1.reduced(&[0]).unwrap().eigenvalues();
        let s_vn: f64 = ev.iter().filter(|&&l| l > 1e-15).map(|l| -l * l.log2()).sum();
        assert!((s_vn - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_ten_peaks_at_five() {
        let s = ModeSpace::two_mode(10, 10);
        let b = make_binomial(10, &s).unwrap();
        let amps: Vec<f64> = (0..=10).map(|n| b.amps[s.flat_index(&[10 - n, n])].re).collect();
        assert!(amps.iter().all(|&a| a > 0.0));
        let peak = amps.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(peak, 5);
        // oracle: C(10, n) / 2^10
        for (n, a) in amps.iter().enumerate() {
            assert!((a * a - crate::special::binomial(10, n) / 1024.0).abs() < 1e-14);
        }
        assert!(make_binomial(11, &s).is_err());
    }

    #[test]
    fn binomial_two_reduced_spectrum() {
        let s = ModeSpace::two_mode(2, 2);
        let rho = make_binomial(2, &s).unwrap().to_density().unwrap();
        let mut ev = rho.partial_trace(&[0]).unwrap().eigenvalues();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([0.25, 0.25, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn squeezed_vacuum_limits() {
        let s = ModeSpace::two_mode(30, 30);
        let z = make_two_mode_squeezed(c(0.0), &s).unwrap();
        assert!((z.amps[0] - c(1.0)).norm() < 1e-15);
        let z = make_two_mode_squeezed(c(0.1), &s).unwrap();
        let ev = z.reduced(&[0]).unwrap().eigenvalues();
        let s_vn: f64 = ev.iter().filter(|&&l| l > 1e-15).map(|l| -l * l.log2()).sum();
        assert!(s_vn > 0.0 && s_vn < 0.2);
    }

    #[test]
    fn tensor_placement() {
        let a = make_fock(1, &ModeSpace::fock(2)).unwrap();
        let b = make_fock(0, &ModeSpace::fock(3)).unwrap();
        let ab = tensor_pure(&a, &b);
        assert!((ab.amps[4] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn bell_reduction_is_maximally_mixed() {
        let s = ModeSpace::qubits(2);
        let h = 0.5f64.sqrt();
        let psi = PureState::new(s, DVector::from_vec(vec![c(h), c(0.0), c(0.0), c(h)])).unwrap();
        let ra = psi.to_density().unwrap().partial_trace(&[0]).unwrap();
        assert!((ra.mat[(0, 0)] - c(0.5)).norm() < 1e-15);
        assert!(ra.mat[(0, 1)].norm() < 1e-15);
        assert!((ra.purity() - 0.5).abs() < 1e-15);
        assert!(psi.to_density().unwrap().partial_trace(&[2]).is_err());
    }

    #[test]
    fn pure_reduction_matches_density_reduction() {
        let s = ModeSpace::new(vec![2, 3, 2]).unwrap();
        let amps = DVector::from_fn(12, |i, _| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()));
        let psi = PureState::new(s, amps).unwrap();
        let rho = psi.to_density().unwrap();
        for keep in [vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]] {
            let a = psi.reduced(&keep).unwrap();
            let b = rho.partial_trace(&keep).unwrap();
            assert!((&a.mat - &b.mat).norm() < 1e-13);
        }
    }
}
