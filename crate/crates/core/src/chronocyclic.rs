//! Two-photon frequency-comb states and the time-time slice of their chronocyclic
//! tomograms.
//!
//! With a monochromatic pump the slice depends on u = t_I − t_S only:
//!
//!   w(u) = exp(−a u²/2) |A_S(u)|² |A_I(u)|² / (M τ_p),  a = Δω²ΔΩ²/(Δω²+ΔΩ²),
//!
//! where each arm contributes a tooth sum A(u) = Σ_n s_n exp(i u n κ) with
//! κ = ω̄ΔΩ²/(2(Δω²+ΔΩ²)) and s_n = 1 (in phase) or (−1)ⁿ (alternating).
//! The slice is therefore Toeplitz on a uniform grid, and everything below is
//! stored and reduced through its profile along u.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Relative f₋ weight below which a tooth is dropped.
pub const TOOTH_WEIGHT_CUTOFF: f64 = 1e-6;
/// Allowed deviation of the slice integral from one.
pub const NORMALIZATION_TOL: f64 = 1e-3;
/// Dimensional time constant multiplying the normalization, in seconds.
pub const TAU_P: f64 = 1.0;
/// Dense export guard (entries).
const MAX_DENSE: usize = 1 << 26;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombParams {
    /// Pump frequency ω_p (rad/s).
    pub omega_p: f64,
    /// Comb spacing ω̄.
    pub omega_bar: f64,
    /// Width Δω of one comb tooth.
    pub d_omega: f64,
    /// Mean Ω₀ of Ω = ω_S − ω_I.
    pub omega_0: f64,
    /// Width ΔΩ of f₋.
    pub d_big_omega: f64,
    /// Inclusive signal tooth index range.
    pub n_window: (i64, i64),
}

impl CombParams {
    /// Angular inputs; the tooth window is chosen from the f₋ weight cutoff.
    pub fn new(omega_p: f64, omega_bar: f64, d_omega: f64, omega_0: f64, d_big_omega: f64) -> Result<Self> {
        let n_window = tooth_window(omega_p, omega_bar, omega_0, d_big_omega, TOOTH_WEIGHT_CUTOFF)?;
        let p = Self { omega_p, omega_bar, d_omega, omega_0, d_big_omega, n_window };
        p.validate()?;
        Ok(p)
    }

    /// Inputs given as ordinary frequencies f = ω/2π (Hz).
    pub fn from_hz(f_p: f64, f_bar: f64, df: f64, f_0: f64, d_big_f: f64) -> Result<Self> {
        Self::new(TAU * f_p, TAU * f_bar, TAU * df, TAU * f_0, TAU * d_big_f)
    }

    /// The comb used for the α/β discrimination study.
    pub fn standard() -> Self {
        Self::from_hz(391.8856e12, 19.2e9, 1.92e9, 10.9e12, 6e12).expect("valid built-in comb")
    }

    pub fn with_window(mut self, lo: i64, hi: i64) -> Result<Self> {
        self.n_window = (lo, hi);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega_p, self.omega_bar, self.d_omega, self.omega_0, self.d_big_omega];
        if all.iter().any(|v| !v.is_finite()) || self.omega_bar <= 0.0 || self.d_omega <= 0.0 || self.d_big_omega <= 0.0 {
            return Err(Error::Parameter("comb frequencies must be finite and widths positive".into()));
        }
        if self.d_omega >= self.omega_bar {
            return Err(Error::Parameter("teeth are not resolved: Δω ≥ ω̄".into()));
        }
        if self.n_window.1 < self.n_window.0 {
            return Err(Error::Parameter("empty tooth window".into()));
        }
        Ok(())
    }

    pub fn n_teeth(&self) -> usize {
        (self.n_window.1 - self.n_window.0 + 1) as usize
    }

    /// f₋(Ω) = exp(−(Ω − Ω₀)²/4ΔΩ²).
    pub fn f_minus(&self, big_omega: f64) -> f64 {
        let d = big_omega - self.omega_0;
        (-d * d / (4.0 * self.d_big_omega * self.d_big_omega)).exp()
    }

    /// Ω for signal tooth n when the idler takes the rest of the pump.
    pub fn tooth_big_omega(&self, n: i64) -> f64 {
        2.0 * n as f64 * self.omega_bar - self.omega_p
    }

    fn sum_sq(&self) -> f64 {
        self.d_omega * self.d_omega + self.d_big_omega * self.d_big_omega
    }

    /// κ, the tooth phase rate in u.
    pub fn comb_rate(&self) -> f64 {
        self.omega_bar * self.d_big_omega * self.d_big_omega / (2.0 * self.sum_sq())
    }

    /// a in the envelope exp(−a u²/2).
    pub fn envelope_rate(&self) -> f64 {
        self.d_omega * self.d_omega * self.d_big_omega * self.d_big_omega / self.sum_sq()
    }

    /// Distance between neighbouring in-phase ridges along u, 2π/κ.
    pub fn ridge_spacing(&self) -> f64 {
        TAU / self.comb_rate()
    }

    pub fn mu0(&self) -> f64 {
        (PI * self.envelope_rate() / 2.0).sqrt()
    }
}

/// Signal teeth n with f₋(2nω̄ − ω_p) ≥ rel.
pub fn tooth_window(omega_p: f64, omega_bar: f64, omega_0: f64, d_big_omega: f64, rel: f64) -> Result<(i64, i64)> {
    if !(rel > 0.0 && rel < 1.0) || omega_bar <= 0.0 {
        return Err(Error::Parameter("tooth cutoff must lie in (0, 1)".into()));
    }
    let half = 2.0 * d_big_omega * (-rel.ln()).sqrt();
    let lo = ((omega_p + omega_0 - half) / (2.0 * omega_bar)).ceil() as i64;
    let hi = ((omega_p + omega_0 + half) / (2.0 * omega_bar)).floor() as i64;
    if hi < lo {
        return Err(Error::Parameter("no comb tooth above the weight cutoff".into()));
    }
    Ok((lo, hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombArm {
    InPhase,
    Alternating,
}

impl CombArm {
    fn sign(self, n: i64) -> f64 {
        match self {
            CombArm::Alternating if n.rem_euclid(2) == 1 => -1.0,
            _ => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombState {
    /// f_cav ⊗ f_cav
    Alpha,
    /// g_cav on the signal, f_cav on the idler
    Beta,
}

impl CombState {
    /// (signal, idler)
    pub fn arms(self) -> (CombArm, CombArm) {
        match self {
            CombState::Alpha => (CombArm::InPhase, CombArm::InPhase),
            CombState::Beta => (CombArm::Alternating, CombArm::InPhase),
        }
    }
}

/// Literal tooth sum A(u) over the window.
pub fn arm_sum(p: &CombParams, arm: CombArm, u: f64) -> C64 {
    let k = p.comb_rate();
    (p.n_window.0..=p.n_window.1)
        .map(|n| C64::from_polar(arm.sign(n), u * n as f64 * k))
        .sum()
}

/// |A(u)| from the geometric series; equal to |arm_sum| without the O(n) loop.
pub fn arm_modulus(p: &CombParams, arm: CombArm, u: f64) -> f64 {
    let mut x = u * p.comb_rate();
    if arm == CombArm::Alternating {
        x += PI;
    }
    dirichlet(x, p.n_teeth())
}

/// |Σ_{j<n} e^{ijx}|
fn dirichlet(x: f64, n: usize) -> f64 {
    let x = x.rem_euclid(TAU);
    let half = 0.5 * x;
    let s = half.sin();
    if s.abs() < 1e-12 {
        return n as f64;
    }
    ((n as f64 * half).sin() / s).abs()
}

/// 𝓜 through the collapse on s = n − n′ + m′ − m:
/// 𝓜 = (π/μ₀) Σ_s c(s) exp(−s² κ²/2a), κ²/2a = ω̄²ΔΩ²/(8Δω²(Δω²+ΔΩ²)), c(s) the signed count of index quadruples.
pub fn normalization(p: &CombParams, arms: (CombArm, CombArm)) -> f64 {
    let n = p.n_teeth() as i64;
    let beta = p.comb_rate().powi(2) / (2.0 * p.envelope_rate());
    // terms past exp(−45) are below double precision relative to s = 0
    let s_max = ((45.0 / beta).sqrt().ceil() as i64).min(2 * (n - 1));
    let tri = |d: i64| if d.abs() < n { (n - d.abs()) as f64 } else { 0.0 };
    let sign = |arm: CombArm, d: i64| if arm == CombArm::Alternating && d.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
    let mut total = 0.0;
    for s in -s_max..=s_max {
        let c: f64 = (-(n - 1)..n)
            .map(|d1| {
                let d2 = s - d1;
                sign(arms.0, d1) * sign(arms.1, d2) * tri(d1) * tri(d2)
            })
            .sum();
        total += c * (-(s * s) as f64 * beta).exp();
    }
    PI / p.mu0() * total
}

/// Grid shared by t_S and t_I, cell centres t_min + (i + ½)dt.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
}

impl TTGrid {
    pub fn new(t_min: f64, t_max: f64, n_t: usize) -> Result<Self> {
        if !(t_max > t_min) || n_t < 2 {
            return Err(Error::Parameter("time grid needs t_max > t_min and at least two points".into()));
        }
        Ok(Self { t_min, t_max, n_t })
    }

    /// Symmetric grid covering the envelope down to the tooth cutoff and at least three
    /// comb periods, with dt at 0.8 of the largest step that still integrates the
    /// highest tooth harmonic exactly.
    pub fn default_for(p: &CombParams) -> Self {
        let a = p.envelope_rate();
        let env_span = (-2.0 * TOOTH_WEIGHT_CUTOFF.ln() / a).sqrt();
        let span = env_span.max(3.0 * TAU / p.omega_bar);
        let n = p.n_teeth();
        let mut dt = 0.125 / a.sqrt();
        if n > 1 {
            dt = dt.min(0.8 * TAU / (2.0 * (n - 1) as f64 * p.comb_rate()));
        }
        let n_t = (span / dt).ceil() as usize;
        Self { t_min: -0.5 * span, t_max: 0.5 * span, n_t }
    }

    pub fn refined(&self, factor: usize) -> Self {
        Self { n_t: self.n_t * factor, ..*self }
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / self.n_t as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t_min + (i as f64 + 0.5) * self.dt()
    }

    pub fn span(&self) -> f64 {
        self.t_max - self.t_min
    }
}

/// Time-time slice w(t_S, t_I) stored by its profile along d = j − i (u = d·dt).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TTTomogram {
    pub grid: TTGrid,
    pub arms: (CombArm, CombArm),
    /// w at d = −(n_t−1) ..= n_t−1, index d + n_t − 1.
    pub profile: Vec<f64>,
    /// ∫ w du τ_p over the grid's u range.
    pub norm_integral: f64,
}

impl TTTomogram {
    pub fn n(&self) -> usize {
        self.grid.n_t
    }

    /// w at signal index i, idler index j.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.profile[j + self.n() - 1 - i]
    }

    pub fn at_offset(&self, d: i64) -> f64 {
        self.profile[(d + self.n() as i64 - 1) as usize]
    }

    pub fn u_values(&self) -> Vec<f64> {
        let n = self.n() as i64;
        let dt = self.grid.dt();
        (-(n - 1)..n).map(|d| d as f64 * dt).collect()
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.n();
        if n * n > MAX_DENSE {
            return Err(Error::Dimension(format!("{n}×{n} time grid too large to materialize")));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| self.at(i, j)))
    }
}

pub fn tt_tomogram(state: CombState, p: &CombParams, g: &TTGrid) -> Result<TTTomogram> {
    tt_tomogram_arms(state.arms(), p, g)
}

/// Fails with a normalization error when the grid is too short or too coarse
/// (aliased teeth) for the slice to integrate to one.
pub fn tt_tomogram_arms(arms: (CombArm, CombArm), p: &CombParams, g: &TTGrid) -> Result<TTTomogram> {
    p.validate()?;
    let n = g.n_t as i64;
    let dt = g.dt();
    let a = p.envelope_rate();
    let scale = 1.0 / (normalization(p, arms) * TAU_P);
    let profile: Vec<f64> = (-(n - 1)..n)
        .into_par_iter()
        .map(|d| {
            let u = d as f64 * dt;
            let s = arm_modulus(p, arms.0, u);
            let i = arm_modulus(p, arms.1, u);
            scale * (-0.5 * a * u * u).exp() * s * s * i * i
        })
        .collect();
    let norm_integral = profile.iter().sum::<f64>() * dt * TAU_P;
    if (norm_integral - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Normalization { integral: norm_integral, tol: NORMALIZATION_TOL });
    }
    Ok(TTTomogram { grid: *g, arms, profile, norm_integral })
}

/// Discrete mutual information (bits) of the binned slice, marginals by row and column sums.
/// Runs in O(n_t) using the Toeplitz structure.
pub fn chrono_eps_tei(w: &TTTomogram) -> Result<f64> {
    let n = w.n();
    let counts = |k: usize| (n - (k as i64 - n as i64 + 1).unsigned_abs() as usize) as f64;
    let z: f64 = w.profile.iter().enumerate().map(|(k, &v)| counts(k) * v).sum();
    if !(z > 0.0) {
        return Err(Error::Undefined("time-time slice has no weight on the grid".into()));
    }
    let mut joint = 0.0;
    for (k, &v) in w.profile.iter().enumerate() {
        let q = v / z;
        if q > 0.0 {
            joint -= counts(k) * q * q.log2();
        }
    }
    // row i sums profile[n−1−i ..= 2n−2−i]; column j sums profile[j ..= j+n−1]
    let mut prefix = vec![0.0; w.profile.len() + 1];
    for (k, &v) in w.profile.iter().enumerate() {
        prefix[k + 1] = prefix[k] + v / z;
    }
    let ent = |ps: &mut dyn Iterator<Item = f64>| -> f64 { ps.filter(|&q| q > 0.0).map(|q| -q * q.log2()).sum() };
    let h_s = ent(&mut (0..n).map(|i| prefix[2 * n - 1 - i] - prefix[n - 1 - i]));
    let h_i = ent(&mut (0..n).map(|j| prefix[j + n] - prefix[j]));
    Ok((h_s + h_i - joint).max(0.0))
}

/// Mutual information (bits) of an arbitrary nonnegative surface, normalized internally.
pub fn discrete_mi(w: &DMatrix<f64>) -> Result<f64> {
    let z = w.sum();
    if !(z > 0.0) || w.iter().any(|&v| v < 0.0) {
        return Err(Error::Undefined("surface must be nonnegative with positive mass".into()));
    }
    let h = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
    let rows: f64 = (0..w.nrows()).map(|i| h(w.row(i).sum() / z)).sum();
    let cols: f64 = (0..w.ncols()).map(|j| h(w.column(j).sum() / z)).sum();
    let joint: f64 = w.iter().map(|&v| h(v / z)).sum();
    Ok((rows + cols - joint).max(0.0))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub n_coarse: usize,
    pub n_fine: usize,
    pub eps_coarse: f64,
    pub eps_fine: f64,
}

impl RefinementStudy {
    pub fn relative_change(&self) -> f64 {
        (self.eps_fine - self.eps_coarse).abs() / self.eps_coarse.abs()
    }
}

/// ε at the given grid and at twice its resolution.
pub fn refinement_study(state: CombState, p: &CombParams, g: &TTGrid) -> Result<RefinementStudy> {
    let fine = g.refined(2);
    let eps_coarse = chrono_eps_tei(&tt_tomogram(state, p, g)?)?;
    let eps_fine = chrono_eps_tei(&tt_tomogram(state, p, &fine)?)?;
    Ok(RefinementStudy { n_coarse: g.n_t, n_fine: fine.n_t, eps_coarse, eps_fine })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(lo: i64, hi: i64) -> CombParams {
        CombParams::standard().with_window(lo, hi).unwrap()
    }

    #[test]
    fn standard_window_matches_cutoff() {
        let p = CombParams::standard();
        let (lo, hi) = p.n_window;
        let peak = p.f_minus(p.omega_0);
        assert!(p.f_minus(p.tooth_big_omega(lo)) >= TOOTH_WEIGHT_CUTOFF * peak);
        assert!(p.f_minus(p.tooth_big_omega(hi)) >= TOOTH_WEIGHT_CUTOFF * peak);
        assert!(p.f_minus(p.tooth_big_omega(lo - 1)) < TOOTH_WEIGHT_CUTOFF * peak);
        assert!(p.f_minus(p.tooth_big_omega(hi + 1)) < TOOTH_WEIGHT_CUTOFF * peak);
    }

    #[test]
    fn modulus_matches_literal_sum() {
        let p = toy(10480, 10520);
        for arm in [CombArm::InPhase, CombArm::Alternating] {
            for k in 0..200 {
                let u = -3e-10 + k as f64 * 3.1e-12;
                let lit = arm_sum(&p, arm, u).norm();
                assert!((lit - arm_modulus(&p, arm, u)).abs() < 1e-8 * p.n_teeth() as f64);
            }
        }
    }

    #[test]
    fn collapse_matches_quadruple_loop() {
        // a loose comb so that s ≠ 0 terms actually contribute
        let mut p = toy(3, 7);
        p.d_omega = 0.45 * p.omega_bar;
        let beta = p.comb_rate().powi(2) / (2.0 * p.envelope_rate());
        for arms in [CombState::Alpha.arms(), CombState::Beta.arms(), (CombArm::InPhase, CombArm::Alternating)] {
            let mut brute = 0.0;
            for n in 3..=7i64 {
                for n2 in 3..=7i64 {
                    for m in 3..=7i64 {
                        for m2 in 3..=7i64 {
                            let s = (n - n2 + m2 - m) as f64;
                            let sign = arms.0.sign(n) * arms.0.sign(n2) * arms.1.sign(m) * arms.1.sign(m2);
                            brute += sign * (-s * s * beta).exp();
                        }
                    }
                }
            }
            brute *= PI / p.mu0();
            let fast = normalization(&p, arms);
            assert!((fast - brute).abs() < 1e-12 * brute.abs(), "{fast} vs {brute}");
        }
    }

    #[test]
    fn normalization_matches_quadrature_on_a_dense_comb() {
        // ω̄/Δω ≈ 6.8 so that the s = ±1 terms matter at the 1e-5 level
        let p = CombParams::from_hz(391.8856e12, 15.36e9, 2.2735e9, 10.9e12, 6e12).unwrap();
        let a = p.envelope_rate();
        let h = 0.05 / (p.n_teeth() as f64 * p.comb_rate());
        let m = (12.0 / a.sqrt() / h) as i64;
        let quad: f64 = (-m..=m)
            .map(|i| {
                let u = i as f64 * h;
                (-0.5 * a * u * u).exp() * arm_modulus(&p, CombArm::InPhase, u).powi(2) * arm_modulus(&p, CombArm::Alternating, u).powi(2)
            })
            .sum::<f64>()
            * h;
        let closed = normalization(&p, CombState::Beta.arms());
        assert!((closed - quad).abs() < 1e-9 * quad, "{closed} vs {quad}");
    }

    #[test]
    fn single_tooth_is_a_gaussian_ridge() {
        let p = toy(0, 0);
        let g = TTGrid::default_for(&p);
        let w = tt_tomogram(CombState::Alpha, &p, &g).unwrap();
        let a = p.envelope_rate();
        let peak = w.at_offset(0);
        for (k, u) in w.u_values().iter().enumerate().step_by(7) {
            let want = peak * (-0.5 * a * u * u).exp();
            assert!((w.profile[k] - want).abs() < 1e-12 * peak);
        }
        assert!((w.norm_integral - 1.0).abs() < 1e-6);
        assert_eq!(w.at(3, 5), w.at(10, 12));
    }

    #[test]
    fn alpha_and_beta_ridges_are_displaced() {
        let p = CombParams::standard();
        let g = TTGrid::default_for(&p);
        let wa = tt_tomogram(CombState::Alpha, &p, &g).unwrap();
        let wb = tt_tomogram(CombState::Beta, &p, &g).unwrap();
        let half = PI / p.comb_rate();
        let d_half = (half / g.dt()).round() as i64;
        let a_peak = wa.at_offset(0);
        // α vanishes half way between its ridges where β has one
        assert!(wa.at_offset(d_half) < 1e-6 * a_peak);
        let b_near: f64 = (d_half - 2..=d_half + 2).map(|d| wb.at_offset(d)).fold(0.0, f64::max);
        let b_max = wb.profile.iter().cloned().fold(0.0, f64::max);
        assert!(b_near > 0.2 * b_max);
        // ridge spacing of α is 2π/κ
        let d_full = (p.ridge_spacing() / g.dt()).round() as i64;
        let a_near: f64 = (d_full - 2..=d_full + 2).map(|d| wa.at_offset(d)).fold(0.0, f64::max);
        assert!(a_near > 0.1 * a_peak);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let p = CombParams::standard();
        let g = TTGrid::default_for(&p);
        let coarse = TTGrid { n_t: g.n_t / 3, ..g };
        assert!(matches!(tt_tomogram(CombState::Alpha, &p, &coarse), Err(Error::Normalization { .. })));
    }

    #[test]
    fn toeplitz_mi_matches_dense() {
        let p = toy(10490, 10500);
        let g = TTGrid::default_for(&p);
        let g = TTGrid { n_t: g.n_t.min(900), ..g };
        let w = TTTomogram {
            grid: g,
            arms: CombState::Beta.arms(),
            profile: (0..2 * g.n_t - 1).map(|k| 1.0 + ((k as f64) * 0.37).sin().powi(2)).collect(),
            norm_integral: 1.0,
        };
        let fast = chrono_eps_tei(&w).unwrap();
        let dense = discrete_mi(&w.to_dense().unwrap()).unwrap();
        assert!((fast - dense).abs() < 1e-10, "{fast} vs {dense}");
    }

    #[test]
    fn factorized_surface_has_zero_mi() {
        let w = DMatrix::from_fn(40, 30, |i, j| (1.0 + i as f64).sqrt() * (2.0 + (j as f64).cos()));
        assert!(discrete_mi(&w).unwrap() < 1e-12);
    }

    #[test]
    fn idler_alternation_gives_same_eps() {
        let p = toy(10470, 10510);
        let g = TTGrid::default_for(&p);
        let signal = tt_tomogram_arms((CombArm::Alternating, CombArm::InPhase), &p, &g).unwrap();
        let idler = tt_tomogram_arms((CombArm::InPhase, CombArm::Alternating), &p, &g).unwrap();
        let (a, b) = (chrono_eps_tei(&signal).unwrap(), chrono_eps_tei(&idler).unwrap());
        assert!((a - b).abs() < 1e-10);
    }
}
