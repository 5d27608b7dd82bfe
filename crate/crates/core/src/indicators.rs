//! Tomographic entanglement indicators and the density-matrix measures they are compared with.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::eigh;
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, PureState};
use crate::tomography::{integrate2, JointSlice, SpinTomogram, Tomogram, TwoModeSlicer, SLICE_NORM_TOL};

/// Indicator values above this negative floor are rounding and clamp to zero.
pub const NEGATIVE_CLAMP: f64 = -1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorKind {
    Tei,
    Ipr,
    Pcc,
    Bd,
}

impl IndicatorKind {
    pub const ALL: [IndicatorKind; 4] = [IndicatorKind::Tei, IndicatorKind::Ipr, IndicatorKind::Pcc, IndicatorKind::Bd];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceIndicator {
    pub theta_a: f64,
    pub theta_b: f64,
    pub kind: IndicatorKind,
    pub value: f64,
}

fn clamp(value: f64) -> Result<f64> {
    if value < NEGATIVE_CLAMP {
        return Err(Error::NegativeIndicator(value));
    }
    Ok(value.max(0.0))
}

fn check_norm(s: &JointSlice) -> Result<()> {
    let integral = s.integral();
    if (integral - 1.0).abs() > SLICE_NORM_TOL {
        return Err(Error::Normalization { integral, tol: SLICE_NORM_TOL });
    }
    Ok(())
}

fn xlogx(w: f64) -> f64 {
    if w > 0.0 {
        w * w.log2()
    } else {
        0.0
    }
}

/// −∫ w log₂ w over a one-dimensional density.
pub fn entropy_1d(w: &[f64], weights: &[f64]) -> f64 {
    -w.iter().zip(weights).map(|(&v, q)| q * xlogx(v)).sum::<f64>()
}

/// Slice mutual information S(θ_A) + S(θ_B) − S(θ_A, θ_B), in bits.
pub fn eps_tei(s: &JointSlice) -> Result<f64> {
    check_norm(s)?;
    let (wa, wb) = (s.grid_a.weights(), s.grid_b.weights());
    let sa = entropy_1d(&s.marginal_a(), &wa);
    let sb = entropy_1d(&s.marginal_b(), &wb);
    let joint: Vec<f64> = s.values.iter().map(|&v| xlogx(v)).collect();
    let sab = -integrate2(&joint, &wa, &wb);
    clamp(sa + sb - sab)
}

/// 1 + η_AB − η_A − η_B with η the integrated squared density.
///
/// For continuous slices this does not vanish on products: it equals (1 − η_A)(1 − η_B) there.
pub fn eps_ipr(s: &JointSlice) -> Result<f64> {
    check_norm(s)?;
    let (wa, wb) = (s.grid_a.weights(), s.grid_b.weights());
    let sq = |v: &[f64], w: &[f64]| v.iter().zip(w).map(|(x, q)| q * x * x).sum::<f64>();
    let joint: Vec<f64> = s.values.iter().map(|v| v * v).collect();
    let value = 1.0 + integrate2(&joint, &wa, &wb) - sq(&s.marginal_a(), &wa) - sq(&s.marginal_b(), &wb);
    clamp(value)
}

/// |Pearson correlation| of X_θA and X_θB over the slice.
pub fn eps_pcc(s: &JointSlice) -> Result<f64> {
    check_norm(s)?;
    let (wa, wb) = (s.grid_a.weights(), s.grid_b.weights());
    let (xa, xb) = (s.grid_a.xs(), s.grid_b.xs());
    let (pa, pb) = (s.marginal_a(), s.marginal_b());
    let m1 = |p: &[f64], x: &[f64], w: &[f64], k: i32| p.iter().zip(x).zip(w).map(|((p, x), w)| p * w * x.powi(k)).sum::<f64>();
    let (ma, mb) = (m1(&pa, &xa, &wa, 1), m1(&pb, &xb, &wb, 1));
    let va = m1(&pa, &xa, &wa, 2) - ma * ma;
    let vb = m1(&pb, &xb, &wb, 2) - mb * mb;
    let nb = s.n_b();
    let mut cross = 0.0;
    for i in 0..s.n_a() {
        let row: f64 = (0..nb).map(|j| wb[j] * xb[j] * s.values[i * nb + j]).sum();
        cross += wa[i] * xa[i] * row;
    }
    let denom = (va * vb).sqrt();
    if denom < 1e-300 {
        return Err(Error::Undefined("zero quadrature variance".into()));
    }
    Ok(((cross - ma * mb) / denom).abs().min(1.0))
}

/// Bhattacharyya distance −log₂ ∫∫ √(w · w_A w_B) between the slice and its product of marginals.
pub fn eps_bd(s: &JointSlice) -> Result<f64> {
    check_norm(s)?;
    let (wa, wb) = (s.grid_a.weights(), s.grid_b.weights());
    let (pa, pb) = (s.marginal_a(), s.marginal_b());
    let nb = s.n_b();
    let root: Vec<f64> = s.values.iter().enumerate().map(|(k, &v)| (v.max(0.0) * pa[k / nb].max(0.0) * pb[k % nb].max(0.0)).sqrt()).collect();
    let bc = integrate2(&root, &wa, &wb);
    clamp(-bc.log2())
}

pub fn eps(s: &JointSlice, kind: IndicatorKind) -> Result<f64> {
    match kind {
        IndicatorKind::Tei => eps_tei(s),
        IndicatorKind::Ipr => eps_ipr(s),
        IndicatorKind::Pcc => eps_pcc(s),
        IndicatorKind::Bd => eps_bd(s),
    }
}

/// Anything that yields joint (θ_A, θ_B) sections.
pub trait SliceSource: Sync {
    fn joint(&self, theta_a: f64, theta_b: f64) -> Result<JointSlice>;
}

impl SliceSource for TwoModeSlicer {
    fn joint(&self, theta_a: f64, theta_b: f64) -> Result<JointSlice> {
        Ok(self.slice(theta_a, theta_b))
    }
}

impl SliceSource for Tomogram {
    fn joint(&self, theta_a: f64, theta_b: f64) -> Result<JointSlice> {
        if self.modes() != 2 {
            return Err(Error::Dimension("joint slices need a two-mode tomogram".into()));
        }
        let ia = self.grids[0].theta_index(theta_a).ok_or(Error::Quorum(theta_a))?;
        let ib = self.grids[1].theta_index(theta_b).ok_or(Error::Quorum(theta_b))?;
        Ok(self.joint_slice(ia, ib))
    }
}

/// n equally spaced angles in [0, π), starting at 0.
pub fn default_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| PI * k as f64 / n as f64).collect()
}

/// Every slice indicator on the grid angles × angles, in row-major (θ_A, θ_B) order.
pub fn slice_indicators(src: &dyn SliceSource, angles: &[f64], kinds: &[IndicatorKind]) -> Result<Vec<SliceIndicator>> {
    let pairs: Vec<(f64, f64)> = angles.iter().flat_map(|&a| angles.iter().map(move |&b| (a, b))).collect();
    let nested: Vec<Vec<SliceIndicator>> = pairs
        .par_iter()
        .map(|&(theta_a, theta_b)| {
            let s = src.joint(theta_a, theta_b)?;
            kinds.iter().map(|&kind| Ok(SliceIndicator { theta_a, theta_b, kind, value: eps(&s, kind)? })).collect()
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// ξ: the arithmetic mean of ε over the angle grid.
pub fn xi_average(src: &dyn SliceSource, kind: IndicatorKind, angles: &[f64]) -> Result<f64> {
    let vals: Vec<f64> = slice_indicators(src, angles, &[kind])?.iter().map(|s| s.value).collect();
    Ok(mean(&vals))
}

/// All four ξ from a single pass over the angle grid, ordered as `IndicatorKind::ALL`.
pub fn xi_all(src: &dyn SliceSource, angles: &[f64]) -> Result<[f64; 4]> {
    let all = slice_indicators(src, angles, &IndicatorKind::ALL)?;
    let mut out = [0.0; 4];
    for (k, kind) in IndicatorKind::ALL.iter().enumerate() {
        let v: Vec<f64> = all.iter().filter(|s| s.kind == *kind).map(|s| s.value).collect();
        out[k] = mean(&v);
    }
    Ok(out)
}

/// ξ′: mean of the values exceeding mean + one standard deviation (population).
/// Falls back to the plain mean when the values are all equal.
pub fn xi_prime(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Parameter("no slice values to average".into()));
    }
    let m = mean(values);
    let sd = (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt();
    let above: Vec<f64> = values.iter().copied().filter(|&v| v > m + sd).collect();
    if above.is_empty() {
        return Ok(m);
    }
    Ok(mean(&above))
}

/// ξ′_TEI over the angle grid (10 angles give the 100 pairs used by default).
pub fn xi_prime_tei(src: &dyn SliceSource, angles: &[f64]) -> Result<f64> {
    let vals: Vec<f64> = slice_indicators(src, angles, &[IndicatorKind::Tei])?.iter().map(|s| s.value).collect();
    xi_prime(&vals)
}

/// −Σ p log₂ p over eigenvalues, ignoring the numerically negative tail.
pub fn von_neumann_entropy(eigs: &[f64]) -> f64 {
    -eigs.iter().filter(|&&p| p > 1e-15).map(|&p| p * p.log2()).sum::<f64>()
}

pub fn xi_svne(rho: &DensityMatrix, keep: &[usize]) -> Result<f64> {
    Ok(von_neumann_entropy(&rho.partial_trace(keep)?.eigenvalues()))
}

pub fn xi_svne_pure(psi: &PureState, keep: &[usize]) -> Result<f64> {
    Ok(von_neumann_entropy(&psi.reduced(keep)?.eigenvalues()))
}

/// 1 − Tr ρ_i².
pub fn xi_sle(rho: &DensityMatrix, keep: &[usize]) -> Result<f64> {
    Ok(1.0 - rho.partial_trace(keep)?.purity())
}

pub fn xi_sle_pure(psi: &PureState, keep: &[usize]) -> Result<f64> {
    Ok(1.0 - psi.reduced(keep)?.purity())
}

/// S(A) + S(B) − S(AB) where AB is the reduced state on a ∪ b.
pub fn xi_qmi(rho: &DensityMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    let mut ab: Vec<usize> = a.iter().chain(b).copied().collect();
    ab.sort_unstable();
    ab.dedup();
    if ab.len() != a.len() + b.len() {
        return Err(Error::Parameter("subsystem groups overlap".into()));
    }
    let value = xi_svne(rho, a)? + xi_svne(rho, b)? - xi_svne(rho, &ab)?;
    clamp(value)
}

/// ½ Σ (|ℒ| − ℒ) over the eigenvalues of the partial transpose on `transposed`.
pub fn negativity(rho: &DensityMatrix, transposed: &[usize]) -> Result<f64> {
    let pt = rho.partial_transpose(transposed)?;
    let (eigs, _) = eigh(&pt);
    Ok(0.5 * eigs.iter().map(|l| l.abs() - l).sum::<f64>())
}

/// Pearson correlation coefficient between two equally long series.
pub fn series_pcc(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Dimension("series must have equal length >= 2".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("constant series has no correlation".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Discrete mutual information between qubit groups `part_a` and the rest, for one basis row.
pub fn spin_eps_tei(st: &SpinTomogram, row: usize, part_a: &[usize], log_base: f64) -> Result<f64> {
    let n = st.n_qubits;
    if part_a.iter().any(|&q| q >= n) || part_a.is_empty() || part_a.len() >= n {
        return Err(Error::Parameter(format!("invalid qubit group {part_a:?} of {n}")));
    }
    let probs = st.probs.get(row).ok_or_else(|| Error::Parameter(format!("no tomogram row {row}")))?;
    let in_a = |q: usize| part_a.contains(&q);
    let key = |o: usize, want_a: bool| {
        (0..n).filter(|&q| in_a(q) == want_a).fold(0usize, |k, q| (k << 1) | ((o >> (n - 1 - q)) & 1))
    };
    let na = 1 << part_a.len();
    let nb = 1 << (n - part_a.len());
    let mut joint = vec![0.0; na * nb];
    for (o, &p) in probs.iter().enumerate() {
        joint[key(o, true) * nb + key(o, false)] += p;
    }
    let mut pa = vec![0.0; na];
    let mut pb = vec![0.0; nb];
    for i in 0..na {
        for j in 0..nb {
            pa[i] += joint[i * nb + j];
            pb[j] += joint[i * nb + j];
        }
    }
    let h = |v: &[f64]| -v.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>();
    clamp((h(&pa) + h(&pb) - h(&joint)) / log_base.ln())
}

/// Mean of `spin_eps_tei` over every basis row of the tomogram.
pub fn spin_xi_tei(st: &SpinTomogram, part_a: &[usize], log_base: f64) -> Result<f64> {
    let vals = (0..st.probs.len()).map(|r| spin_eps_tei(st, r, part_a, log_base)).collect::<Result<Vec<_>>>()?;
    Ok(mean(&vals))
}

/// Columns of an indicator series, in their fixed output order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    XiTei,
    XiPrimeTei,
    XiIpr,
    XiPcc,
    XiBd,
    XiSvne,
    XiSle,
    XiQmi,
    Negativity,
    D1,
    D2,
    D3,
    Delta,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::XiTei => "xi_tei",
            Column::XiPrimeTei => "xi_prime_tei",
            Column::XiIpr => "xi_ipr",
            Column::XiPcc => "xi_pcc",
            Column::XiBd => "xi_bd",
            Column::XiSvne => "xi_svne",
            Column::XiSle => "xi_sle",
            Column::XiQmi => "xi_qmi",
            Column::Negativity => "negativity",
            Column::D1 => "d1",
            Column::D2 => "d2",
            Column::D3 => "d3",
            Column::Delta => "delta",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct IndicatorSeries {
    pub axis_label: String,
    pub axis: Vec<f64>,
    pub columns: Vec<(Column, Vec<f64>)>,
}

impl IndicatorSeries {
    pub fn new(axis_label: &str, axis: Vec<f64>) -> Self {
        Self { axis_label: axis_label.into(), axis, columns: Vec::new() }
    }

    /// Inserts or replaces a column, keeping the fixed column order.
    pub fn set(&mut self, col: Column, values: Vec<f64>) -> Result<()> {
        if values.len() != self.axis.len() {
            return Err(Error::Dimension(format!("column {} has {} rows, axis has {}", col.name(), values.len(), self.axis.len())));
        }
        self.columns.retain(|(c, _)| *c != col);
        let pos = self.columns.partition_point(|(c, _)| *c < col);
        self.columns.insert(pos, (col, values));
        Ok(())
    }

    pub fn get(&self, col: Column) -> Option<&[f64]> {
        self.columns.iter().find(|(c, _)| *c == col).map(|(_, v)| v.as_slice())
    }

    /// Fills d₁ = |ξ_SVNE − ξ′_TEI|, d₂ = |ξ_SLE − ξ′_TEI|, d₃ = |ξ_SLE − ξ_IPR| and
    /// Δ = |ξ_SVNE − ξ_SLE| wherever both inputs are present.
    pub fn add_differences(&mut self) -> Result<()> {
        let rules = [
            (Column::D1, Column::XiSvne, Column::XiPrimeTei),
            (Column::D2, Column::XiSle, Column::XiPrimeTei),
            (Column::D3, Column::XiSle, Column::XiIpr),
            (Column::Delta, Column::XiSvne, Column::XiSle),
        ];
        for (out, a, b) in rules {
            if let (Some(x), Some(y)) = (self.get(a), self.get(b)) {
                let d = x.iter().zip(y).map(|(p, q)| (p - q).abs()).collect();
                self.set(out, d)?;
            }
        }
        Ok(())
    }
}
