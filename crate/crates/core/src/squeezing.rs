//! Normal-ordered moments from tomograms and the squeezing diagnostics built on them.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{embed, qubit, DensityMatrix, ModeSpace, PureState};
use crate::special::{binomial, factorial, hermite, ln_factorial};
use crate::tomography::Tomogram;

/// Reference values of ⟨(Δη)^{2q}⟩ for a coherent state, q = 1..4: (2q−1)!!/4^q.
pub const HONG_MANDEL_TWO_MODE_THRESHOLDS: [f64; 4] = [0.25, 3.0 / 16.0, 15.0 / 64.0, 105.0 / 256.0];

/// Entropic squeezing bound on a single quadrature, (1 + ln π)/2.
pub fn entropic_threshold() -> f64 {
    0.5 * (1.0 + PI.ln())
}

/// Values within this of a threshold count as not squeezed (rounding on marginal states).
pub const SQUEEZE_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeReport {
    pub q: usize,
    pub value: f64,
    pub threshold: f64,
    pub squeezed: bool,
}

impl SqueezeReport {
    pub fn new(q: usize, value: f64, threshold: f64) -> Self {
        Self { q, value, threshold, squeezed: value < threshold - SQUEEZE_MARGIN }
    }
}

/// Anything that can report normal-ordered moments ⟨a†^k a^l b†^m b^n⟩.
/// Single-mode sources only accept m = n = 0.
pub trait Moments {
    fn moment(&self, k: usize, l: usize, m: usize, n: usize) -> Result<C64>;
}

fn lower_ops(psi: &PureState, mode: usize, power: usize) -> DVector<C64> {
    // a^power acting on `mode`
    let space = &psi.space;
    let stride: usize = space.dims()[mode + 1..].iter().product();
    let mut out = DVector::zeros(psi.dim());
    for i in 0..psi.dim() {
        let n = space.multi_index(i)[mode];
        if n >= power {
            let f = (0.5 * (ln_factorial(n) - ln_factorial(n - power))).exp();
            out[i - power * stride] = psi.amps[i] * f;
        }
    }
    out
}

impl Moments for PureState {
    /// ⟨a^k b^m ψ | a^l b^n ψ⟩, exact in the truncated space.
    fn moment(&self, k: usize, l: usize, m: usize, n: usize) -> Result<C64> {
        let modes = self.space.n_subsystems();
        if modes > 2 || (modes == 1 && m + n > 0) {
            return Err(Error::Dimension("moments need one or two modes".into()));
        }
        let apply = |p: usize, q: usize| {
            let v = lower_ops(self, 0, p);
            if modes == 2 {
                let tmp = PureState { space: self.space.clone(), amps: v };
                lower_ops(&tmp, 1, q)
            } else {
                v
            }
        };
        Ok(apply(k, m).dotc(&apply(l, n)))
    }
}

impl Moments for DensityMatrix {
    /// Σ √((i+l)!(i+k)!)/i! · √((j+n)!(j+m)!)/j! · ρ_{(i+l, j+n), (i+k, j+m)}
    fn moment(&self, k: usize, l: usize, m: usize, n: usize) -> Result<C64> {
        let space = &self.space;
        let modes = space.n_subsystems();
        if modes > 2 || (modes == 1 && m + n > 0) {
            return Err(Error::Dimension("moments need one or two modes".into()));
        }
        let da = space.dims()[0];
        let db = if modes == 2 { space.dims()[1] } else { 1 };
        let idx = |a: usize, b: usize| if modes == 2 { space.flat_index(&[a, b]) } else { a };
        let w = |i: usize, p: usize, q: usize| {
            (0.5 * (ln_factorial(i + p) + ln_factorial(i + q)) - ln_factorial(i)).exp()
        };
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..da {
            if i + k.max(l) >= da {
                break;
            }
            for j in 0..db {
                if j + m.max(n) >= db {
                    break;
                }
                acc += self.mat[(idx(i + l, j + n), idx(i + k, j + m))] * w(i, k, l) * w(j, m, n);
            }
        }
        Ok(acc)
    }
}

impl Moments for Tomogram {
    fn moment(&self, k: usize, l: usize, m: usize, n: usize) -> Result<C64> {
        match self.modes() {
            1 if m + n == 0 => moment_from_tomogram_single(self, k, l),
            2 => moment_from_tomogram_two(self, k, l, m, n),
            _ => Err(Error::Dimension("moment order does not match tomogram modes".into())),
        }
    }
}

fn quorum_indices(grid: &crate::tomography::QuadGrid, order: usize) -> Result<Vec<(usize, f64)>> {
    (0..=order)
        .map(|j| {
            let th = j as f64 * PI / (order + 1) as f64;
            grid.theta_index(th).map(|i| (i, th)).ok_or(Error::Quorum(th))
        })
        .collect()
}

fn hermite_profile(grid: &crate::tomography::QuadGrid, order: usize) -> Vec<f64> {
    let w = grid.weights();
    grid.xs().iter().zip(&w).map(|(&x, w)| w * hermite(order, x)).collect()
}

/// ⟨a†^k a^l⟩ = C_kl Σ_m e^{−i(k−l)θ_m} ∫ w(X, θ_m) H_{k+l}(X) dX, θ_m = mπ/(k+l+1),
/// C_kl = k! l! / ((k+l+1)! √(2^{k+l})).
pub fn moment_from_tomogram_single(t: &Tomogram, k: usize, l: usize) -> Result<C64> {
    if t.modes() != 1 {
        return Err(Error::Dimension("single-mode moment from a two-mode tomogram".into()));
    }
    let order = k + l;
    if order > 60 {
        return Err(Error::Parameter("moment order above 60".into()));
    }
    let g = &t.grids[0];
    let quorum = quorum_indices(g, order)?;
    let hw = hermite_profile(g, order);
    let c = factorial(k) * factorial(l) / (factorial(order + 1) * 2f64.powf(order as f64 / 2.0));
    let mut acc = C64::new(0.0, 0.0);
    for (i, th) in quorum {
        let integral: f64 = t.slice(i).iter().zip(&hw).map(|(a, b)| a * b).sum();
        acc += C64::from_polar(integral, -(k as f64 - l as f64) * th);
    }
    Ok(acc * c)
}

/// Two-mode extension, using (k+l+1)(m+n+1) joint slices.
pub fn moment_from_tomogram_two(t: &Tomogram, k: usize, l: usize, m: usize, n: usize) -> Result<C64> {
    if t.modes() != 2 {
        return Err(Error::Dimension("two-mode moment from a single-mode tomogram".into()));
    }
    let (oa, ob) = (k + l, m + n);
    let (ga, gb) = (&t.grids[0], &t.grids[1]);
    let qa = quorum_indices(ga, oa)?;
    let qb = quorum_indices(gb, ob)?;
    let ha = hermite_profile(ga, oa);
    let hb = hermite_profile(gb, ob);
    let c = factorial(k) * factorial(l) * factorial(m) * factorial(n)
        / (factorial(oa + 1) * factorial(ob + 1) * 2f64.powf((oa + ob) as f64 / 2.0));
    let mut acc = C64::new(0.0, 0.0);
    for &(ia, tha) in &qa {
        for &(ib, thb) in &qb {
            let s = t.joint_slice(ia, ib);
            let integral: f64 = s
                .values
                .chunks(gb.n_x)
                .zip(&ha)
                .map(|(row, wa)| wa * row.iter().zip(&hb).map(|(v, wb)| v * wb).sum::<f64>())
                .sum();
            let phase = -(k as f64 - l as f64) * tha - (m as f64 - n as f64) * thb;
            acc += C64::from_polar(integral, phase);
        }
    }
    Ok(acc * c)
}

fn central_moment(xs: &[f64], w: &[f64], weights: &[f64], power: usize) -> f64 {
    let mean: f64 = xs.iter().zip(w).zip(weights).map(|((x, v), q)| x * v * q).sum();
    xs.iter().zip(w).zip(weights).map(|((x, v), q)| (x - mean).powi(power as i32) * v * q).sum()
}

/// ⟨(ΔX_θ)^{2q}⟩ from the θ-slice.
pub fn hong_mandel_moment(t: &Tomogram, theta: f64, q: usize) -> Result<f64> {
    if t.modes() != 1 {
        return Err(Error::Dimension("Hong-Mandel moment needs a single-mode tomogram".into()));
    }
    let g = &t.grids[0];
    let i = g.theta_index(theta).ok_or(Error::Quorum(theta))?;
    Ok(central_moment(&g.xs(), t.slice(i), &g.weights(), 2 * q))
}

/// ⟨(Δη)^{2q}⟩ for η = (a + a† + b + b†)/(2√2) = (X_A + X_B)/2 on the θ_A = θ_B = 0 slice.
pub fn two_mode_quadrature_moment(t: &Tomogram, q: usize) -> Result<SqueezeReport> {
    if t.modes() != 2 {
        return Err(Error::Dimension("η moment needs a two-mode tomogram".into()));
    }
    let (ga, gb) = (&t.grids[0], &t.grids[1]);
    let ia = ga.theta_index(0.0).ok_or(Error::Quorum(0.0))?;
    let ib = gb.theta_index(0.0).ok_or(Error::Quorum(0.0))?;
    let s = t.joint_slice(ia, ib);
    let (xa, xb, wa, wb) = (ga.xs(), gb.xs(), ga.weights(), gb.weights());
    let nb = gb.n_x;
    let expect = |f: &dyn Fn(f64) -> f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..ga.n_x {
            for j in 0..nb {
                acc += wa[i] * wb[j] * s.values[i * nb + j] * f(0.5 * (xa[i] + xb[j]));
            }
        }
        acc
    };
    let mean = expect(&|e| e);
    let value = expect(&|e| (e - mean).powi(2 * q as i32));
    let threshold = HONG_MANDEL_TWO_MODE_THRESHOLDS
        .get(q.wrapping_sub(1))
        .copied()
        .unwrap_or_else(|| double_factorial(2 * q - 1) / 4f64.powi(q as i32));
    Ok(SqueezeReport::new(q, value, threshold))
}

fn double_factorial(n: usize) -> f64 {
    (1..=n).rev().step_by(2).map(|k| k as f64).product()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HilleryComponent {
    Z1,
    Z2,
}

/// ⟨a^q a†^q⟩ − ⟨a†^q a^q⟩ = Σ_{j≥1} j! C(q,j)² ⟨a†^{q−j} a^{q−j}⟩, on mode 0 or 1.
fn commutator_mean(src: &dyn Moments, q: usize, mode: usize) -> Result<f64> {
    let mut acc = 0.0;
    for j in 1..=q {
        let c = factorial(j) * binomial(q, j).powi(2);
        let p = q - j;
        let mom = if mode == 0 { src.moment(p, p, 0, 0)? } else { src.moment(0, 0, p, p)? };
        acc += c * mom.re;
    }
    Ok(acc)
}

/// Hillery q-th power squeezing D_q = (2⟨(ΔZ)²⟩ − |⟨F_q⟩|)/|⟨F_q⟩| with F_q = [Z₁, Z₂]/i-part.
///
/// One mode: Z₁ = (a^q + a†^q)/√2, Z₂ = (a^q − a†^q)/(√2 i).
/// Two modes: Z₁ = (a^q + a†^q + b^q + b†^q)/(2√2), Z₂ likewise with minus signs over 2√2 i.
/// Squeezed iff −1 ≤ D_q < 0.
pub fn hillery_dq(src: &dyn Moments, q: usize, which: HilleryComponent, modes: usize) -> Result<SqueezeReport> {
    if q == 0 {
        return Err(Error::Parameter("Hillery order q must be >= 1".into()));
    }
    let sign = match which {
        HilleryComponent::Z1 => 1.0,
        HilleryComponent::Z2 => -1.0,
    };
    let (var, f) = match modes {
        1 => {
            let a_q = src.moment(0, q, 0, 0)?;
            let a_2q = src.moment(0, 2 * q, 0, 0)?;
            let ndn = src.moment(q, q, 0, 0)?.re;
            let comm = commutator_mean(src, q, 0)?;
            // ⟨AA† + A†A⟩ = 2⟨A†A⟩ + ⟨[A, A†]⟩
            let sym = 2.0 * ndn + comm;
            let mean = match which {
                HilleryComponent::Z1 => 2f64.sqrt() * a_q.re,
                HilleryComponent::Z2 => 2f64.sqrt() * a_q.im,
            };
            let second = 0.5 * (sign * 2.0 * a_2q.re + sym);
            (second - mean * mean, comm.abs())
        }
        2 => {
            // S = a^q + b^q
            let s1 = src.moment(0, q, 0, 0)? + src.moment(0, 0, 0, q)?;
            let s2 = src.moment(0, 2 * q, 0, 0)? + src.moment(0, 0, 0, 2 * q)? + src.moment(0, q, 0, q)? * 2.0;
            let ca = commutator_mean(src, q, 0)?;
            let cb = commutator_mean(src, q, 1)?;
            let sds = src.moment(q, q, 0, 0)?.re + src.moment(0, 0, q, q)?.re + 2.0 * src.moment(q, 0, 0, q)?.re;
            // ⟨SS† + S†S⟩ = 2⟨S†S⟩ + ⟨[S, S†]⟩
            let sym = 2.0 * sds + ca + cb;
            let mean = match which {
                HilleryComponent::Z1 => s1.re / 2f64.sqrt(),
                HilleryComponent::Z2 => s1.im / 2f64.sqrt(),
            };
            let second = (sign * 2.0 * s2.re + sym) / 8.0;
            (second - mean * mean, 0.25 * (ca + cb).abs())
        }
        _ => return Err(Error::Dimension("Hillery squeezing for one or two modes".into())),
    };
    if f < 1e-12 {
        return Err(Error::Undefined(format!("|<F_q>| = {f:.3e} too small for D_q")));
    }
    let d = (2.0 * var - f) / f;
    Ok(SqueezeReport { q, value: d, threshold: 0.0, squeezed: hillery_squeezed(d) })
}

fn hillery_squeezed(d: f64) -> bool {
    d >= -1.0 - SQUEEZE_MARGIN && d < -SQUEEZE_MARGIN
}

/// D_q evaluated directly with truncated-space operator matrices; the top 2q Fock rows
/// are excluded from ⟨[Z₁, Z₂]⟩ where truncation corrupts the commutator.
pub fn hillery_dq_operator(rho: &DensityMatrix, q: usize, which: HilleryComponent) -> Result<SqueezeReport> {
    if rho.space.n_subsystems() != 1 {
        return Err(Error::Dimension("operator route implemented for one mode".into()));
    }
    let d = rho.dim();
    let mut aq = DMatrix::<C64>::identity(d, d);
    let a = crate::fock::destroy(d);
    for _ in 0..q {
        aq = &aq * &a;
    }
    let s2 = C64::new(2f64.sqrt(), 0.0);
    let z1 = (&aq + aq.adjoint()) / s2;
    let z2 = (&aq - aq.adjoint()) / (s2 * C64::i());
    let comm = &z1 * &z2 - &z2 * &z1;
    let keep = d.saturating_sub(2 * q);
    let f: C64 = (0..keep).flat_map(|i| (0..keep).map(move |j| (i, j))).map(|(i, j)| comm[(i, j)] * rho.mat[(j, i)]).sum();
    let z = if which == HilleryComponent::Z1 { z1 } else { z2 };
    let mean = (&z * &rho.mat).trace().re;
    let second = (&z * &z * &rho.mat).trace().re;
    let f = f.norm();
    if f < 1e-12 {
        return Err(Error::Undefined(format!("|<F_q>| = {f:.3e} too small for D_q")));
    }
    let dq = (2.0 * (second - mean * mean) - f) / f;
    Ok(SqueezeReport { q, value: dq, threshold: 0.0, squeezed: hillery_squeezed(dq) })
}

/// S(θ) = −∫ w ln w dX (natural log), with 0 ln 0 = 0.
pub fn tomographic_entropy_slice(t: &Tomogram, theta: f64) -> Result<f64> {
    if t.modes() != 1 {
        return Err(Error::Dimension("slice entropy needs a single-mode tomogram".into()));
    }
    let g = &t.grids[0];
    let i = g.theta_index(theta).ok_or(Error::Quorum(theta))?;
    Ok(-t.slice(i).iter().zip(g.weights()).map(|(&w, q)| if w > 0.0 { q * w * w.ln() } else { 0.0 }).sum::<f64>())
}

/// Deterministic, nearly uniform directions on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Collective spin components J = Σ_i σ_i (half-Pauli) of a two-qubit register.
fn collective_spin() -> [DMatrix<C64>; 3] {
    let s = ModeSpace::qubits(2);
    let sum = |op: DMatrix<C64>| embed(&op, 0, &s) + embed(&op, 1, &s);
    [sum(qubit::sx()), sum(qubit::sy()), sum(qubit::sz())]
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.space.dims() != [2, 2] {
        return Err(Error::Dimension("spin squeezing is defined here for two qubits".into()));
    }
    Ok(())
}

fn expect(rho: &DensityMatrix, op: &DMatrix<C64>) -> f64 {
    (op * &rho.mat).trace().re
}

fn unit_perpendicular(v: &Vector3<f64>) -> Vector3<f64> {
    let trial = if v.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    v.cross(&trial).normalize()
}

/// Kitagawa-Ueda minimum variance (ΔJ_min)² normal to the mean spin; squeezed below 0.5.
///
/// With a null mean spin every direction is normal to it and `n_dirs` Fibonacci directions
/// are scanned; otherwise `n_dirs` directions on the great circle normal to ⟨J⟩.
pub fn spin_min_variance(rho: &DensityMatrix, n_dirs: usize) -> Result<SqueezeReport> {
    require_two_qubits(rho)?;
    let j = collective_spin();
    let mean = Vector3::new(expect(rho, &j[0]), expect(rho, &j[1]), expect(rho, &j[2]));
    let dirs: Vec<Vector3<f64>> = if mean.norm() < 1e-10 {
        fibonacci_sphere(n_dirs)
    } else {
        let u = unit_perpendicular(&mean);
        let w = mean.normalize().cross(&u);
        (0..n_dirs).map(|k| {
            let a = PI * k as f64 / n_dirs as f64;
            u * a.cos() + w * a.sin()
        }).collect()
    };
    let second = DMatrix::from_fn(3, 3, |a, b| 0.5 * expect(rho, &(&j[a] * &j[b] + &j[b] * &j[a])));
    let best = dirs
        .iter()
        .map(|v| {
            let vv = DVector::from_column_slice(v.as_slice());
            let m = v.dot(&mean);
            (vv.transpose() * &second * &vv)[(0, 0)] - m * m
        })
        .fold(f64::INFINITY, f64::min);
    Ok(SqueezeReport::new(1, best, 0.5))
}

/// Second-order variance (Δ𝒥_min)² of 𝒥 = ½(v₁·JJ·v₂ + v₂·JJ·v₁), squeezed below 0.125.
///
/// Pairs are orthonormal (v₁ ⊥ v₂, the analogue of v⊥) and satisfy ⟨𝒥⟩ = v₁ᵀ S v₂ = 0 with
/// S the symmetrized second-moment matrix, so v₂ ∝ v₁ × S v₁. When S v₁ ∥ v₁ every v₂ ⊥ v₁
/// qualifies and `n_circle` of them are sampled. Under these constraints a spin coherent
/// state attains exactly 0.125.
pub fn spin_second_order_variance(rho: &DensityMatrix, n_v1: usize, n_circle: usize) -> Result<SqueezeReport> {
    require_two_qubits(rho)?;
    let j = collective_spin();
    let jj: Vec<Vec<DMatrix<C64>>> = (0..3).map(|a| (0..3).map(|b| &j[a] * &j[b]).collect()).collect();
    let s = nalgebra::Matrix3::from_fn(|a, b| 0.5 * expect(rho, &(&jj[a][b] + &jj[b][a])));
    let variance = |v1: &Vector3<f64>, v2: &Vector3<f64>| {
        let mut op = DMatrix::<C64>::zeros(4, 4);
        for a in 0..3 {
            for b in 0..3 {
                let c = 0.5 * (v1[a] * v2[b] + v2[a] * v1[b]);
                op += &jj[a][b] * C64::new(c, 0.0);
            }
        }
        let mean = expect(rho, &op);
        debug_assert!(mean.abs() < 1e-10);
        expect(rho, &(&op * &op)) - mean * mean
    };
    let mut best = f64::INFINITY;
    for v1 in fibonacci_sphere(n_v1) {
        let cross = v1.cross(&(s * v1));
        if cross.norm() > 1e-9 {
            best = best.min(variance(&v1, &cross.normalize()));
        } else {
            let p = unit_perpendicular(&v1);
            let r = v1.cross(&p);
            for k in 0..n_circle {
                let a = PI * k as f64 / n_circle as f64;
                best = best.min(variance(&v1, &(p * a.cos() + r * a.sin())));
            }
        }
    }
    Ok(SqueezeReport::new(2, best, 0.125))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_coherent, make_fock};
    use crate::tomography::{tomogram_pure_single, QuadGrid};

    fn quorum_grid(max_order: usize) -> QuadGrid {
        let mut th: Vec<f64> = (0..=max_order).flat_map(QuadGrid::quorum_angles).collect();
        th.sort_by(f64::total_cmp);
        th.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        QuadGrid::standard(th).unwrap()
    }

    #[test]
    fn simple_moments_from_tomograms() {
        let g = quorum_grid(2);
        let s = ModeSpace::fock(30);
        let vac = tomogram_pure_single(&make_fock(0, &s).unwrap(), &g).unwrap();
        assert!(moment_from_tomogram_single(&vac, 1, 0).unwrap().norm() < 1e-12);
        let one = tomogram_pure_single(&make_fock(1, &s).unwrap(), &g).unwrap();
        assert!((moment_from_tomogram_single(&one, 1, 1).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-10);
        let cs = tomogram_pure_single(&make_coherent(C64::new(1.0, 0.0), &s).unwrap(), &g).unwrap();
        assert!((moment_from_tomogram_single(&cs, 2, 0).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn missing_quorum_is_reported() {
        let g = QuadGrid::standard(vec![0.0]).unwrap();
        let t = tomogram_pure_single(&make_fock(0, &ModeSpace::fock(3)).unwrap(), &g).unwrap();
        assert!(matches!(moment_from_tomogram_single(&t, 1, 0), Err(Error::Quorum(_))));
    }

    #[test]
    fn direct_moments_agree_between_pure_and_density() {
        let psi = make_coherent(C64::new(0.7, -0.4), &ModeSpace::fock(25)).unwrap();
        let rho = psi.to_density().unwrap();
        for (k, l) in [(0, 0), (1, 0), (2, 1), (3, 3)] {
            let a = psi.moment(k, l, 0, 0).unwrap();
            let b = rho.moment(k, l, 0, 0).unwrap();
            let alpha = C64::new(0.7, -0.4);
            let want = alpha.conj().powu(k as u32) * alpha.powu(l as u32);
            assert!((a - b).norm() < 1e-12 && (a - want).norm() < 1e-9);
        }
    }

    #[test]
    fn hong_mandel_coherent_values() {
        let g = QuadGrid::standard(vec![0.0, 0.9]).unwrap();
        let t = tomogram_pure_single(&make_coherent(C64::new(1.0, 1.0), &ModeSpace::fock(30)).unwrap(), &g).unwrap();
        assert!((hong_mandel_moment(&t, 0.0, 1).unwrap() - 0.5).abs() < 1e-9);
        assert!((hong_mandel_moment(&t, 0.9, 2).unwrap() - 0.75).abs() < 1e-9);
    }

    #[test]
    fn hillery_coherent_is_marginal() {
        let psi = make_coherent(C64::new(0.9, 0.3), &ModeSpace::fock(40)).unwrap();
        let d = hillery_dq(&psi, 1, HilleryComponent::Z1, 1).unwrap();
        assert!(d.value.abs() < 1e-10 && !d.squeezed);
        let rho = psi.to_density().unwrap();
        for q in 1..=3 {
            let a = hillery_dq(&rho, q, HilleryComponent::Z1, 1).unwrap().value;
            let b = hillery_dq_operator(&rho, q, HilleryComponent::Z1).unwrap().value;
            assert!((a - b).abs() < 1e-8, "q = {q}: {a} vs {b}");
        }
    }

    #[test]
    fn hillery_vacuum_second_order_matches_operator() {
        let rho = make_fock(0, &ModeSpace::fock(12)).unwrap().to_density().unwrap();
        let a = hillery_dq(&rho, 2, HilleryComponent::Z1, 1).unwrap().value;
        let b = hillery_dq_operator(&rho, 2, HilleryComponent::Z1).unwrap().value;
        assert!((a - b).abs() < 1e-12);
        assert!(a.abs() < 1e-12);
    }

    #[test]
    fn vacuum_entropy_is_at_the_bound() {
        let g = QuadGrid::standard(vec![0.0]).unwrap();
        let t = tomogram_pure_single(&make_fock(0, &ModeSpace::fock(2)).unwrap(), &g).unwrap();
        assert!((tomographic_entropy_slice(&t, 0.0).unwrap() - entropic_threshold()).abs() < 1e-9);
    }

    #[test]
    fn spin_coherent_state_is_not_squeezed() {
        // both spins down
        let s = ModeSpace::qubits(2);
        let psi = PureState::basis(s, &[qubit::GROUND, qubit::GROUND]).unwrap();
        let rho = psi.to_density().unwrap();
        let r = spin_min_variance(&rho, 800).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9 && !r.squeezed, "{r:?}");
        let r2 = spin_second_order_variance(&rho, 640, 16).unwrap();
        assert!(r2.value >= 0.125 - 1e-12, "{}", r2.value);
    }
}
