//! Optical homodyne tomograms (one and two modes) and qubit tomograms.
//!
//! Quadrature convention: X_θ = (a† e^{iθ} + a e^{-iθ})/√2, so the vacuum slice is
//! e^{-X²}/√π and a coherent state |α> is centred at √2 Re(α e^{-iθ}).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, ModeSpace, PureState};
use crate::special::simpson_weights;

/// Tomograms with more entries than this are refused.
pub const MAX_TOMOGRAM_ENTRIES: usize = 1 << 26;

/// Per-slice normalization tolerance enforced on construction.
pub const SLICE_NORM_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub thetas: Vec<f64>,
}

impl QuadGrid {
    pub fn new(x_min: f64, x_max: f64, n_x: usize, thetas: Vec<f64>) -> Result<Self> {
        if n_x < 3 || n_x % 2 == 0 {
            return Err(Error::Parameter(format!("n_x must be odd and >= 3, got {n_x}")));
        }
        if !(x_max > x_min) {
            return Err(Error::Parameter("x_max must exceed x_min".into()));
        }
        if thetas.is_empty() || thetas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("thetas must be nonempty, sorted and distinct".into()));
        }
        Ok(Self { x_min, x_max, n_x, thetas })
    }

    /// X in [-10, 10] on 1001 points with the given angles.
    pub fn standard(thetas: Vec<f64>) -> Result<Self> {
        Self::new(-10.0, 10.0, 1001, thetas)
    }

    /// `n` equally spaced angles k·span/n, k = 0..n, for span π or 2π.
    pub fn equal_angles(n: usize, full_circle: bool) -> Vec<f64> {
        let span = if full_circle { 2.0 * PI } else { PI };
        (0..n).map(|k| k as f64 * span / n as f64).collect()
    }

    /// Angles mπ/(k+l+1), m = 0..=k+l, needed to invert moment ⟨a†^k a^l⟩.
    pub fn quorum_angles(order: usize) -> Vec<f64> {
        (0..=order).map(|m| m as f64 * PI / (order + 1) as f64).collect()
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_x).map(|i| self.x_min + i as f64 * dx).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        simpson_weights(self.n_x, self.dx())
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    /// Index of an angle on the grid, matched to 1e-9 (mod 2π).
    pub fn theta_index(&self, theta: f64) -> Option<usize> {
        self.thetas.iter().position(|&t| angle_eq(t, theta))
    }
}

fn angle_eq(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(2.0 * PI);
    d < 1e-9 || 2.0 * PI - d < 1e-9
}

/// ⟨X,θ|n⟩ for n = 0..=n_max:
/// e^{-x²/2} e^{-inθ} H_n(x) / (π^{1/4} √(n!) 2^{n/2}).
pub fn hermite_weights(n_max: usize, x: f64, theta: f64) -> Vec<C64> {
    oscillator_functions(n_max, x)
        .into_iter()
        .enumerate()
        .map(|(n, f)| C64::from_polar(f, -(n as f64) * theta))
        .collect()
}

/// Real oscillator eigenfunctions φ_n(x), n = 0..=n_max, by the normalized recurrence
/// φ_k = √(2/k) x φ_{k-1} − √((k-1)/k) φ_{k-2}.
///
/// The Gaussian factor is applied at the end together with a running log scale, so
/// neither underflow at large |x| nor overflow at large n can occur.
pub fn oscillator_functions(n_max: usize, x: f64) -> Vec<f64> {
    const BIG: f64 = 1e150;
    let mut raw = vec![0.0; n_max + 1];
    let mut scale = vec![0.0f64; n_max + 1];
    let mut log_scale = 0.0;
    raw[0] = 1.0;
    if n_max >= 1 {
        raw[1] = 2f64.sqrt() * x;
    }
    let (mut p0, mut p1) = (raw[0], if n_max >= 1 { raw[1] } else { 0.0 });
    for k in 2..=n_max {
        let kf = k as f64;
        let mut p2 = (2.0 / kf).sqrt() * x * p1 - ((kf - 1.0) / kf).sqrt() * p0;
        if p2.abs() > BIG {
            p1 /= BIG;
            p2 /= BIG;
            log_scale += BIG.ln();
        }
        raw[k] = p2;
        scale[k] = log_scale;
        p0 = p1;
        p1 = p2;
    }
    let base = -0.25 * PI.ln() - 0.5 * x * x;
    raw.iter().zip(&scale).map(|(r, s)| r * (base + s).exp()).collect()
}

/// φ_n(x_i) for all grid points, as an n_x × (n_max+1) matrix.
fn oscillator_table(xs: &[f64], n_max: usize) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = xs.par_iter().map(|&x| oscillator_functions(n_max, x)).collect();
    DMatrix::from_fn(xs.len(), n_max + 1, |i, n| rows[i][n])
}

/// A single-mode (one grid) or two-mode (two grids) tomogram.
///
/// Layout: single mode values[θ·n_x + x]; two modes
/// values[((θA·nθB + θB)·n_xA + xA)·n_xB + xB].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Tomogram {
    pub grids: Vec<QuadGrid>,
    pub values: Vec<f64>,
}

/// One joint (θA, θB) section of a two-mode tomogram, row-major over (X_A, X_B).
#[derive(Clone, Debug)]
pub struct JointSlice {
    pub grid_a: QuadGrid,
    pub grid_b: QuadGrid,
    pub values: Vec<f64>,
}

impl JointSlice {
    pub fn n_a(&self) -> usize {
        self.grid_a.n_x
    }

    pub fn n_b(&self) -> usize {
        self.grid_b.n_x
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid_b.n_x + j]
    }

    pub fn integral(&self) -> f64 {
        let (wa, wb) = (self.grid_a.weights(), self.grid_b.weights());
        integrate2(&self.values, &wa, &wb)
    }

    /// Marginal on X_A (integrated over X_B).
    pub fn marginal_a(&self) -> Vec<f64> {
        let wb = self.grid_b.weights();
        self.values
            .chunks(self.n_b())
            .map(|row| row.iter().zip(&wb).map(|(v, w)| v * w).sum())
            .collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        let wa = self.grid_a.weights();
        let nb = self.n_b();
        let mut out = vec![0.0; nb];
        for (row, w) in self.values.chunks(nb).zip(&wa) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += w * v;
            }
        }
        out
    }
}

pub(crate) fn integrate2(values: &[f64], wa: &[f64], wb: &[f64]) -> f64 {
    values
        .chunks(wb.len())
        .zip(wa)
        .map(|(row, a)| a * row.iter().zip(wb).map(|(v, b)| v * b).sum::<f64>())
        .sum()
}

impl Tomogram {
    fn checked(grids: Vec<QuadGrid>, values: Vec<f64>) -> Result<Self> {
        let t = Self { grids, values };
        let dev = t.max_normalization_error();
        if dev > SLICE_NORM_TOL {
            return Err(Error::Normalization { integral: 1.0 + dev, tol: SLICE_NORM_TOL });
        }
        Ok(t)
    }

    pub fn modes(&self) -> usize {
        self.grids.len()
    }

    fn slice_len(&self) -> usize {
        self.grids.iter().map(|g| g.n_x).product()
    }

    /// X-profile at θ-index `it` (single mode).
    pub fn slice(&self, it: usize) -> &[f64] {
        let n = self.grids[0].n_x;
        &self.values[it * n..(it + 1) * n]
    }

    pub fn joint_slice(&self, ia: usize, ib: usize) -> JointSlice {
        let len = self.slice_len();
        let k = ia * self.grids[1].n_theta() + ib;
        JointSlice {
            grid_a: self.grids[0].clone(),
            grid_b: self.grids[1].clone(),
            values: self.values[k * len..(k + 1) * len].to_vec(),
        }
    }

    /// Simpson integrals of every θ-slice (θ-tuple for two modes), in storage order.
    pub fn slice_integrals(&self) -> Vec<f64> {
        let len = self.slice_len();
        match self.modes() {
            1 => {
                let w = self.grids[0].weights();
                self.values.chunks(len).map(|s| s.iter().zip(&w).map(|(a, b)| a * b).sum()).collect()
            }
            _ => {
                let (wa, wb) = (self.grids[0].weights(), self.grids[1].weights());
                self.values.chunks(len).map(|s| integrate2(s, &wa, &wb)).collect()
            }
        }
    }

    pub fn max_normalization_error(&self) -> f64 {
        self.slice_integrals().iter().fold(0.0, |m, v| m.max((v - 1.0).abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

fn require_modes(space: &ModeSpace, n: usize) -> Result<()> {
    if space.n_subsystems() != n {
        return Err(Error::Dimension(format!("expected {n} mode(s), got dims {:?}", space.dims())));
    }
    Ok(())
}

fn phases(n: usize, theta: f64) -> Vec<C64> {
    (0..n).map(|k| C64::from_polar(1.0, -(k as f64) * theta)).collect()
}

/// w(X,θ) = |Σ c_n ⟨X,θ|n⟩|².
pub fn tomogram_pure_single(psi: &PureState, grid: &QuadGrid) -> Result<Tomogram> {
    require_modes(&psi.space, 1)?;
    guard(grid.n_theta() * grid.n_x)?;
    let d = psi.dim();
    let phi = oscillator_table(&grid.xs(), d - 1).map(|v| C64::new(v, 0.0));
    let values: Vec<f64> = grid
        .thetas
        .par_iter()
        .flat_map_iter(|&th| {
            let c = DVector::from_iterator(d, psi.amps.iter().zip(phases(d, th)).map(|(a, p)| a * p));
            (&phi * c).iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()
        })
        .collect();
    Tomogram::checked(vec![grid.clone()], values)
}

/// w(X,θ) = Σ_{n,m} ρ_nm ⟨X,θ|n⟩⟨m|X,θ⟩.
pub fn tomogram_density_single(rho: &DensityMatrix, grid: &QuadGrid) -> Result<Tomogram> {
    require_modes(&rho.space, 1)?;
    guard(grid.n_theta() * grid.n_x)?;
    let d = rho.dim();
    let phi = oscillator_table(&grid.xs(), d - 1).map(|v| C64::new(v, 0.0));
    let values: Vec<f64> = grid
        .thetas
        .par_iter()
        .flat_map_iter(|&th| {
            let p = DVector::from_vec(phases(d, th));
            // ρ'_nm = ρ_nm e^{-i(n-m)θ}
            let rot = DMatrix::from_fn(d, d, |n, m| rho.mat[(n, m)] * p[n] * p[m].conj());
            let k = &phi * rot;
            (0..grid.n_x)
                .map(|i| (0..d).map(|m| k[(i, m)] * phi[(i, m)]).sum::<C64>().re)
                .collect::<Vec<_>>()
        })
        .collect();
    Tomogram::checked(vec![grid.clone()], values)
}

/// Pure-state decomposition of a two-mode state: weights and dA × dB coefficient matrices.
pub type Ensemble = Vec<(f64, DMatrix<C64>)>;

pub fn ensemble_pure(psi: &PureState) -> Result<Ensemble> {
    require_modes(&psi.space, 2)?;
    let (da, db) = (psi.space.dims()[0], psi.space.dims()[1]);
    Ok(vec![(1.0, DMatrix::from_fn(da, db, |i, j| psi.amps[i * db + j]))])
}

/// Spectral decomposition of ρ, dropping weights below 1e-14.
pub fn ensemble_density(rho: &DensityMatrix) -> Result<Ensemble> {
    require_modes(&rho.space, 2)?;
    let (da, db) = (rho.space.dims()[0], rho.space.dims()[1]);
    let herm = (&rho.mat + rho.mat.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    Ok(eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-14)
        .map(|(k, &p)| {
            let v = eig.eigenvectors.column(k);
            (p, DMatrix::from_fn(da, db, |i, j| v[i * db + j]))
        })
        .collect())
}

/// Precomputed oscillator tables for repeated two-mode slicing on fixed grids.
pub struct TwoModeSlicer {
    ensemble: Ensemble,
    grid_a: QuadGrid,
    grid_b: QuadGrid,
    phi_a: DMatrix<C64>,
    phi_b_t: DMatrix<C64>,
}

impl TwoModeSlicer {
    pub fn new(ensemble: Ensemble, grid_a: &QuadGrid, grid_b: &QuadGrid) -> Result<Self> {
        let (da, db) = match ensemble.first() {
            Some((_, c)) => (c.nrows(), c.ncols()),
            None => return Err(Error::Parameter("empty ensemble".into())),
        };
        let phi_a = oscillator_table(&grid_a.xs(), da - 1).map(|v| C64::new(v, 0.0));
        let phi_b_t = oscillator_table(&grid_b.xs(), db - 1).map(|v| C64::new(v, 0.0)).transpose();
        Ok(Self { ensemble, grid_a: grid_a.clone(), grid_b: grid_b.clone(), phi_a, phi_b_t })
    }

    pub fn slice(&self, theta_a: f64, theta_b: f64) -> JointSlice {
        let (na, nb) = (self.grid_a.n_x, self.grid_b.n_x);
        let mut values = vec![0.0; na * nb];
        for (p, c) in &self.ensemble {
            let pa = phases(c.nrows(), theta_a);
            let pb = phases(c.ncols(), theta_b);
            let rot = DMatrix::from_fn(c.nrows(), c.ncols(), |i, j| c[(i, j)] * pa[i] * pb[j]);
            let amp = &self.phi_a * rot * &self.phi_b_t;
            for i in 0..na {
                for j in 0..nb {
                    values[i * nb + j] += p * amp[(i, j)].norm_sqr();
                }
            }
        }
        JointSlice { grid_a: self.grid_a.clone(), grid_b: self.grid_b.clone(), values }
    }
}

/// Full two-mode tomogram over all (θA, θB) pairs of the two grids.
pub fn tomogram_two_mode(ensemble: Ensemble, grid_a: &QuadGrid, grid_b: &QuadGrid) -> Result<Tomogram> {
    let pairs = grid_a.n_theta() * grid_b.n_theta();
    guard(pairs.saturating_mul(grid_a.n_x * grid_b.n_x))?;
    let slicer = TwoModeSlicer::new(ensemble, grid_a, grid_b)?;
    let values: Vec<f64> = (0..pairs)
        .into_par_iter()
        .flat_map_iter(|k| {
            let (ia, ib) = (k / grid_b.n_theta(), k % grid_b.n_theta());
            slicer.slice(grid_a.thetas[ia], grid_b.thetas[ib]).values
        })
        .collect();
    Tomogram::checked(vec![grid_a.clone(), grid_b.clone()], values)
}

pub fn tomogram_two_mode_pure(psi: &PureState, grid_a: &QuadGrid, grid_b: &QuadGrid) -> Result<Tomogram> {
    tomogram_two_mode(ensemble_pure(psi)?, grid_a, grid_b)
}

pub fn tomogram_two_mode_density(rho: &DensityMatrix, grid_a: &QuadGrid, grid_b: &QuadGrid) -> Result<Tomogram> {
    tomogram_two_mode(ensemble_density(rho)?, grid_a, grid_b)
}

fn guard(entries: usize) -> Result<()> {
    if entries > MAX_TOMOGRAM_ENTRIES {
        return Err(Error::Dimension(format!("tomogram of {entries} entries exceeds {MAX_TOMOGRAM_ENTRIES}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Single-mode tomogram of one subsystem, integrating out the other quadrature at the
/// grid angle nearest `fixed_other_theta`.
pub fn reduced_tomogram(t: &Tomogram, keep: Subsystem, fixed_other_theta: f64) -> Result<Tomogram> {
    if t.modes() != 2 {
        return Err(Error::Dimension("reduced tomogram needs a two-mode tomogram".into()));
    }
    let other = match keep {
        Subsystem::A => &t.grids[1],
        Subsystem::B => &t.grids[0],
    };
    let fixed = other
        .theta_index(fixed_other_theta)
        .ok_or(Error::Quorum(fixed_other_theta))?;
    let kept_grid = match keep {
        Subsystem::A => t.grids[0].clone(),
        Subsystem::B => t.grids[1].clone(),
    };
    let mut values = Vec::with_capacity(kept_grid.n_theta() * kept_grid.n_x);
    for it in 0..kept_grid.n_theta() {
        let s = match keep {
            Subsystem::A => t.joint_slice(it, fixed),
            Subsystem::B => t.joint_slice(fixed, it),
        };
        values.extend(match keep {
            Subsystem::A => s.marginal_a(),
            Subsystem::B => s.marginal_b(),
        });
    }
    Tomogram::checked(vec![kept_grid], values)
}

/// max |w(X, θ+π) − w(−X, θ)| over all grid angle pairs related by π.
///
/// Needs a grid symmetric in X; returns `None` when no angle pair differs by π.
pub fn tomogram_symmetry_check(t: &Tomogram) -> Result<Option<f64>> {
    if t.modes() != 1 {
        return Err(Error::Dimension("symmetry check is for single-mode tomograms".into()));
    }
    let g = &t.grids[0];
    if (g.x_min + g.x_max).abs() > 1e-12 {
        return Err(Error::Parameter("symmetry check needs a grid symmetric about X = 0".into()));
    }
    let mut worst: Option<f64> = None;
    for (i, &th) in g.thetas.iter().enumerate() {
        if let Some(j) = g.theta_index(th + PI) {
            let (a, b) = (t.slice(j), t.slice(i));
            let n = g.n_x;
            let d = (0..n).fold(0.0f64, |m, k| m.max((a[k] - b[n - 1 - k]).abs()));
            worst = Some(worst.map_or(d, |w: f64| w.max(d)));
        }
    }
    Ok(worst)
}

/// Normalized θ-autocorrelation C(s) = Σ w(X,θ) w(X,θ+s) / Σ w² for shifts
/// s = 0..n_θ−1 (in grid steps). The grid must cover [0, 2π) uniformly.
pub fn theta_autocorrelation(t: &Tomogram) -> Result<Vec<f64>> {
    let g = &t.grids[0];
    let n = g.n_theta();
    let step = 2.0 * PI / n as f64;
    if t.modes() != 1 || g.thetas.iter().enumerate().any(|(k, &th)| (th - k as f64 * step).abs() > 1e-9) {
        return Err(Error::Parameter("autocorrelation needs a uniform θ grid over [0, 2π)".into()));
    }
    let norm: f64 = t.values.iter().map(|v| v * v).sum();
    Ok((0..n)
        .into_par_iter()
        .map(|s| {
            (0..n)
                .map(|i| t.slice(i).iter().zip(t.slice((i + s) % n)).map(|(a, b)| a * b).sum::<f64>())
                .sum::<f64>()
                / norm
        })
        .collect())
}

/// Number of strands in a fractional-revival tomogram.
///
/// An ℓ-component superposition of rotated copies of a coherent state repeats itself
/// under θ → θ + 2π/ℓ. We take the smallest shift at which the θ-autocorrelation has a
/// local maximum above `threshold` and return 2π over that shift; 1 when there is none.
pub fn count_strands(t: &Tomogram, threshold: f64) -> Result<usize> {
    let c = theta_autocorrelation(t)?;
    let n = c.len();
    for s in 1..n {
        let (prev, next) = (c[s - 1], c[(s + 1) % n]);
        if c[s] > threshold && c[s] >= prev && c[s] >= next {
            return Ok((n as f64 / s as f64).round() as usize);
        }
    }
    Ok(1)
}

/// Number of local maxima of an X-profile exceeding `rel` times its maximum.
pub fn ridge_count(profile: &[f64], rel: f64) -> usize {
    let max = profile.iter().cloned().fold(0.0, f64::max);
    profile
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] >= w[2] && w[1] > rel * max)
        .count()
}

/// Measurement direction of one qubit. Outcome 0 is the +1/2 eigenvector of n·σ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpinAxis {
    X,
    Y,
    Z,
    /// Polar and azimuthal angles (ϑ, φ) of the Bloch direction.
    Angles(f64, f64),
}

impl SpinAxis {
    pub fn angles(self) -> (f64, f64) {
        match self {
            SpinAxis::X => (PI / 2.0, 0.0),
            SpinAxis::Y => (PI / 2.0, PI / 2.0),
            SpinAxis::Z => (0.0, 0.0),
            SpinAxis::Angles(t, p) => (t, p),
        }
    }

    /// Rows are the bras of the two outcome states, ordered (+, −).
    ///
    /// Basis |0>, |1> with σ_z|0> = +|0>; here |0> plays the role of |e>.
    fn outcome_bras(self) -> [[C64; 2]; 2] {
        let (t, p) = self.angles();
        let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
        let e = C64::from_polar(1.0, p);
        let plus = [C64::new(c, 0.0), e * s];
        let minus = [C64::new(s, 0.0), -e * c];
        [[plus[0].conj(), plus[1].conj()], [minus[0].conj(), minus[1].conj()]]
    }

    pub fn label(self) -> String {
        match self {
            SpinAxis::X => "x".into(),
            SpinAxis::Y => "y".into(),
            SpinAxis::Z => "z".into(),
            SpinAxis::Angles(t, p) => format!("({t:.6},{p:.6})"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpinTomogram {
    pub n_qubits: usize,
    pub axes: Vec<Vec<SpinAxis>>,
    /// probs[row][outcome], outcome bit k (qubit k) read row-major, qubit 0 most significant.
    pub probs: Vec<Vec<f64>>,
}

impl SpinTomogram {
    pub fn row_of(&self, axes: &[SpinAxis]) -> Option<usize> {
        self.axes.iter().position(|a| a.as_slice() == axes)
    }
}

/// All 3^n combinations of x, y, z measurements.
pub fn all_xyz_axes(n_qubits: usize) -> Vec<Vec<SpinAxis>> {
    let base = [SpinAxis::X, SpinAxis::Y, SpinAxis::Z];
    (0..3usize.pow(n_qubits as u32))
        .map(|mut k| {
            let mut row = vec![SpinAxis::Z; n_qubits];
            for slot in row.iter_mut().rev() {
                *slot = base[k % 3];
                k /= 3;
            }
            row
        })
        .collect()
}

pub fn spin_tomogram(rho: &DensityMatrix, axes_sets: &[Vec<SpinAxis>]) -> Result<SpinTomogram> {
    let n = rho.space.n_subsystems();
    if rho.space.dims().iter().any(|&d| d != 2) {
        return Err(Error::Dimension("spin tomogram needs a register of qubits".into()));
    }
    let dim = rho.dim();
    let probs = axes_sets
        .iter()
        .map(|axes| {
            if axes.len() != n {
                return Err(Error::Dimension(format!("{} axes for {n} qubits", axes.len())));
            }
            let bras: Vec<[[C64; 2]; 2]> = axes.iter().map(|a| a.outcome_bras()).collect();
            let u = DMatrix::from_fn(dim, dim, |o, b| {
                let mut amp = C64::new(1.0, 0.0);
                for q in 0..n {
                    let shift = n - 1 - q;
                    amp *= bras[q][(o >> shift) & 1][(b >> shift) & 1];
                }
                amp
            });
            let rot = &u * &rho.mat * u.adjoint();
            Ok((0..dim).map(|o| rot[(o, o)].re.max(0.0)).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(SpinTomogram { n_qubits: n, axes: axes_sets.to_vec(), probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_coherent, make_fock};

    #[test]
    fn kernel_low_orders() {
        let k = hermite_weights(3, 0.0, 0.3);
        assert!((k[0].re - PI.powf(-0.25)).abs() < 1e-15);
        assert!(k[1].norm() < 1e-15);
        // φ_1(x) = √2 x φ_0(x)
        let f = oscillator_functions(2, 0.8);
        assert!((f[1] - 2f64.sqrt() * 0.8 * f[0]).abs() < 1e-15);
    }

    #[test]
    fn kernel_matches_raw_hermite_at_moderate_order() {
        let (n, x) = (20usize, 1.3);
        let raw = crate::special::hermite(n, x) * (-x * x / 2.0).exp()
            / (PI.powf(0.25) * (crate::special::factorial(n) * 2f64.powi(n as i32)).sqrt());
        assert!((oscillator_functions(n, x)[n] - raw).abs() < 1e-12);
    }

    #[test]
    fn kernel_survives_high_order_and_wide_x() {
        let f = oscillator_functions(1000, 40.0);
        assert!(f.iter().all(|v| v.is_finite()));
        let f = oscillator_functions(1000, 0.5);
        assert!(f.iter().all(|v| v.is_finite() && v.abs() < 1.0));
    }

    #[test]
    fn oscillator_functions_are_orthonormal() {
        let g = QuadGrid::standard(vec![0.0]).unwrap();
        let w = g.weights();
        let tab = oscillator_table(&g.xs(), 30);
        for n in [0usize, 5, 30] {
            for m in [0usize, 5, 30] {
                let s: f64 = (0..g.n_x).map(|i| w[i] * tab[(i, n)] * tab[(i, m)]).sum();
                let want = if n == m { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-10, "n={n} m={m} s={s}");
            }
        }
    }

    #[test]
    fn vacuum_and_one_photon_slices() {
        let g = QuadGrid::standard(vec![0.0, 1.0]).unwrap();
        let s = ModeSpace::fock(5);
        let t = tomogram_pure_single(&make_fock(0, &s).unwrap(), &g).unwrap();
        assert!((t.slice(1)[500] - 1.0 / PI.sqrt()).abs() < 1e-12);
        let t1 = tomogram_pure_single(&make_fock(1, &s).unwrap(), &g).unwrap();
        for (i, x) in g.xs().iter().enumerate() {
            let want = 2.0 * x * x * (-x * x).exp() / PI.sqrt();
            assert!((t1.slice(0)[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_slice_is_centred() {
        let g = QuadGrid::standard(vec![0.0, 0.7]).unwrap();
        let alpha = C64::new(1.0, 0.0);
        let t = tomogram_pure_single(&make_coherent(alpha, &ModeSpace::fock(30)).unwrap(), &g).unwrap();
        let w = g.weights();
        for (k, &th) in g.thetas.iter().enumerate() {
            let mean: f64 = g.xs().iter().zip(t.slice(k)).zip(&w).map(|((x, v), w)| x * v * w).sum();
            let want = 2f64.sqrt() * (alpha * C64::from_polar(1.0, -th)).re;
            assert!((mean - want).abs() < 1e-9);
        }
    }

    #[test]
    fn density_route_matches_pure_route() {
        let g = QuadGrid::standard(QuadGrid::equal_angles(6, true)).unwrap();
        let psi = make_coherent(C64::new(0.8, -0.5), &ModeSpace::fock(25)).unwrap();
        let a = tomogram_pure_single(&psi, &g).unwrap();
        let b = tomogram_density_single(&psi.to_density().unwrap(), &g).unwrap();
        let d = a.values.iter().zip(&b.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(d < 1e-10);
    }

    #[test]
    fn mixed_two_level_average() {
        let g = QuadGrid::standard(vec![0.0]).unwrap();
        let rho = DensityMatrix::maximally_mixed(ModeSpace::fock(1)).unwrap();
        let t = tomogram_density_single(&rho, &g).unwrap();
        for (i, x) in g.xs().iter().enumerate() {
            let want = 0.5 * (1.0 + 2.0 * x * x) * (-x * x).exp() / PI.sqrt();
            assert!((t.slice(0)[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn spin_tomogram_bell_pairs() {
        let h = 0.5f64.sqrt();
        let s = ModeSpace::qubits(2);
        let psi = PureState::new(s, DVector::from_vec(vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)])).unwrap();
        let st = spin_tomogram(&psi.to_density().unwrap(), &all_xyz_axes(2)).unwrap();
        let zz = &st.probs[st.row_of(&[SpinAxis::Z, SpinAxis::Z]).unwrap()];
        let xx = &st.probs[st.row_of(&[SpinAxis::X, SpinAxis::X]).unwrap()];
        for p in [zz, xx] {
            assert!((p[0] - 0.5).abs() < 1e-12 && (p[3] - 0.5).abs() < 1e-12);
            assert!(p[1].abs() < 1e-12 && p[2].abs() < 1e-12);
        }
        for row in &st.probs {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ridge_count_simple() {
        assert_eq!(ridge_count(&[0.0, 1.0, 0.0, 0.5, 0.0], 0.1), 2);
        assert_eq!(ridge_count(&[0.0, 1.0, 0.0, 0.05, 0.0], 0.1), 1);
    }
}
