//! Nonlinear time-series analysis: delay and embedding selection, local Jacobians,
//! local Lyapunov exponents and their large-L extrapolation, power spectra.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shortest series accepted by the embedding operations.
pub const MIN_EMBED_LEN: usize = 1000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalarSeries {
    pub values: Vec<f64>,
    pub dt: f64,
}

impl ScalarSeries {
    pub fn new(values: Vec<f64>, dt: f64) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("series contains non-finite values".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::Parameter("sample step must be positive".into()));
        }
        Ok(Self { values, dt })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn spread(&self) -> (f64, f64) {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn std_dev(&self) -> f64 {
        let n = self.len() as f64;
        let m = self.values.iter().sum::<f64>() / n;
        (self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt()
    }
}

/// x_{n+1} = r x_n (1 − x_n).
pub fn logistic_series(r: f64, x0: f64, n: usize, discard: usize) -> Vec<f64> {
    let mut x = x0;
    for _ in 0..discard {
        x = r * x * (1.0 - x);
    }
    (0..n)
        .map(|_| {
            let out = x;
            x = r * x * (1.0 - x);
            out
        })
        .collect()
}

/// Mutual information (bits) between two equally long samples on equal-width bins.
pub fn binned_mi(x: &[f64], y: &[f64], lo: f64, hi: f64, n_bins: usize) -> f64 {
    let bin = |v: f64| (((v - lo) / (hi - lo) * n_bins as f64) as usize).min(n_bins - 1);
    let mut joint = vec![0.0; n_bins * n_bins];
    let mut px = vec![0.0; n_bins];
    let mut py = vec![0.0; n_bins];
    let w = 1.0 / x.len() as f64;
    for (&a, &b) in x.iter().zip(y) {
        let (i, j) = (bin(a), bin(b));
        joint[i * n_bins + j] += w;
        px[i] += w;
        py[j] += w;
    }
    let mut mi = 0.0;
    for i in 0..n_bins {
        for j in 0..n_bins {
            let p = joint[i * n_bins + j];
            if p > 0.0 {
                mi += p * (p / (px[i] * py[j])).log2();
            }
        }
    }
    mi
}

/// I(T) for T = 1..=max_t.
pub fn mi_curve(s: &ScalarSeries, max_t: usize, n_bins: usize) -> Result<Vec<f64>> {
    let (lo, hi) = s.spread();
    if hi - lo <= 0.0 {
        return Err(Error::Undefined("constant series carries no delay information".into()));
    }
    if max_t == 0 || max_t + 2 > s.len() || n_bins < 2 {
        return Err(Error::Parameter("delay range or bin count out of bounds".into()));
    }
    let v = &s.values;
    Ok((1..=max_t).into_par_iter().map(|t| binned_mi(&v[..v.len() - t], &v[t..], lo, hi, n_bins)).collect())
}

/// Delay τ_d at the first minimum of the binned mutual information I(T).
///
/// If I(1) is already at the level of a shuffled copy of the series the samples are
/// independent at unit lag and τ_d = 1. Without an interior minimum up to `max_t` the
/// first 1/e crossing of the autocorrelation is used; a curve that decays into the
/// shuffled-copy floor before turning up counts as monotone. `smooth` is the half-width of a
/// moving average applied to I(T) before the search (0 keeps the raw curve); binned
/// estimates of nearly periodic signals are jagged enough to need it.
pub fn mi_delay(s: &ScalarSeries, max_t: usize, n_bins: usize, smooth: usize) -> Result<usize> {
    let raw = mi_curve(s, max_t, n_bins)?;
    let curve: Vec<f64> = (0..raw.len())
        .map(|i| {
            let w = &raw[i.saturating_sub(smooth)..(i + smooth + 1).min(raw.len())];
            w.iter().sum::<f64>() / w.len() as f64
        })
        .collect();
    let (lo, hi) = s.spread();
    let mut shuffled = s.values.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    let floor = binned_mi(&s.values, &shuffled, lo, hi, n_bins);
    if raw[0] <= 1.5 * floor {
        return Ok(1);
    }
    for t in 1..curve.len().saturating_sub(1) {
        // once I(T) has decayed into the estimator floor, later dips are noise
        if curve[t] <= 1.5 * floor {
            break;
        }
        if curve[t] < curve[t - 1] && curve[t] <= curve[t + 1] {
            return Ok(t + 1);
        }
    }
    autocorrelation_delay(s, max_t).ok_or_else(|| Error::Undefined("no mutual-information minimum or 1/e crossing".into()))
}

fn autocorrelation_delay(s: &ScalarSeries, max_t: usize) -> Option<usize> {
    let n = s.len();
    let m = s.values.iter().sum::<f64>() / n as f64;
    let c0: f64 = s.values.iter().map(|v| (v - m).powi(2)).sum();
    (1..=max_t).find(|&t| {
        let c: f64 = (0..n - t).map(|i| (s.values[i] - m) * (s.values[i + t] - m)).sum();
        c / c0 < (-1f64).exp()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub tau_d: usize,
    pub d_emb: usize,
}

impl Embedding {
    pub fn new(tau_d: usize, d_emb: usize) -> Result<Self> {
        if tau_d == 0 || d_emb == 0 {
            return Err(Error::Parameter("delay and dimension must be >= 1".into()));
        }
        Ok(Self { tau_d, d_emb })
    }

    /// Number of delay vectors available from n samples.
    pub fn count(&self, n: usize) -> usize {
        n.saturating_sub((self.d_emb - 1) * self.tau_d)
    }

    /// Delay vectors [y_n, y_{n+τ}, …], one per row.
    pub fn vectors(&self, s: &ScalarSeries) -> Result<DMatrix<f64>> {
        let m = self.count(s.len());
        if m < 100 {
            return Err(Error::Parameter(format!("only {m} delay vectors; need at least 100")));
        }
        Ok(DMatrix::from_fn(m, self.d_emb, |i, p| s.values[i + p * self.tau_d]))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub d_max: usize,
    /// Scaling region for C(r), in units of the series standard deviation.
    pub r_lo: f64,
    pub r_hi: f64,
    /// Points used for the pair sum (evenly strided subsample).
    pub max_points: usize,
    /// Relative slope change below which the dimension has saturated.
    pub rel_tol: f64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self { d_max: 8, r_lo: 1e-3, r_hi: 0.1, max_points: 3000, rel_tol: 0.05 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbedResult {
    pub d_emb: usize,
    /// Correlation exponent ℓ for d = 1..
    pub slopes: Vec<f64>,
}

/// Least-squares slope of ln C(r) against ln r over the scaling region.
pub fn correlation_exponent(s: &ScalarSeries, emb: &Embedding, cfg: &EmbedConfig) -> Result<f64> {
    let v = emb.vectors(s)?;
    let m = v.nrows();
    let stride = m.div_ceil(cfg.max_points).max(1);
    let pts: Vec<usize> = (0..m).step_by(stride).collect();
    let mut dists: Vec<f64> = pts
        .par_iter()
        .enumerate()
        .flat_map_iter(|(a, &i)| {
            let v = &v;
            pts[a + 1..].iter().map(move |&j| (v.row(i) - v.row(j)).norm())
        })
        .collect();
    dists.sort_by(f64::total_cmp);
    let total = dists.len() as f64;
    let sd = s.std_dev();
    let n_r = 12;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..n_r {
        let r = sd * cfg.r_lo * (cfg.r_hi / cfg.r_lo).powf(k as f64 / (n_r - 1) as f64);
        let c = dists.partition_point(|&d| d <= r) as f64 / total;
        if c > 0.0 {
            xs.push(r.ln());
            ys.push(c.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::Undefined("too few populated radii in the scaling region".into()));
    }
    Ok(linear_fit(&xs, &ys).1)
}

/// (intercept, slope) of ordinary least squares.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Smallest d whose correlation exponent changes by less than `rel_tol` at d + 1.
pub fn embed_dim(s: &ScalarSeries, tau_d: usize, cfg: &EmbedConfig) -> Result<EmbedResult> {
    if s.len() < MIN_EMBED_LEN {
        return Err(Error::Parameter(format!("series of {} samples is shorter than {MIN_EMBED_LEN}", s.len())));
    }
    let mut slopes = Vec::new();
    for d in 1..=cfg.d_max {
        slopes.push(correlation_exponent(s, &Embedding::new(tau_d, d)?, cfg)?);
        if d >= 2 {
            let (a, b) = (slopes[d - 2], slopes[d - 1]);
            if (b - a).abs() < cfg.rel_tol * a.abs() {
                return Ok(EmbedResult { d_emb: d - 1, slopes });
            }
        }
    }
    Err(Error::Undefined(format!("no saturation of the correlation exponent up to d = {}: {slopes:?}", cfg.d_max)))
}

#[derive(Clone, Debug)]
pub struct LocalJacobian {
    pub index: usize,
    pub jacobian: DMatrix<f64>,
    /// RMS residual of the second-order neighbourhood fit.
    pub residual: f64,
}

/// Unknowns per output component of the second-order fit.
pub fn fit_unknowns(d: usize) -> usize {
    d + d * (d + 1) / 2
}

/// Second-order local fit of the delay map y(n) → y(n+1) around vector `n`.
///
/// When the data lie on a lower-dimensional manifold (a 1D map embedded in d = 2) the
/// quadratic design is rank deficient; the minimum-norm solution is used, which still
/// fixes the action along the manifold. Returns None when fewer than d directions are
/// resolved (the point is skipped).
pub fn local_jacobian(v: &DMatrix<f64>, n: usize, k: usize, theiler: usize) -> Result<Option<LocalJacobian>> {
    let (m, d) = (v.nrows(), v.ncols());
    if n + 1 >= m {
        return Err(Error::Parameter(format!("vector {n} has no successor")));
    }
    let unknowns = fit_unknowns(d);
    if k < unknowns {
        return Err(Error::Parameter(format!("k = {k} neighbours cannot fix {unknowns} unknowns")));
    }
    // exact scan; only candidates with a successor
    let mut cand: Vec<(f64, usize)> = (0..m - 1)
        .filter(|&j| j != n && j.abs_diff(n) > theiler)
        .map(|j| ((v.row(j) - v.row(n)).norm_squared(), j))
        .collect();
    if cand.len() < k {
        return Ok(None);
    }
    cand.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
    let nb = &cand[..k];
    let design = DMatrix::from_fn(k, unknowns, |row, col| {
        let dy = v.row(nb[row].1) - v.row(n);
        if col < d {
            dy[col]
        } else {
            let (l, mm) = quad_index(col - d, d);
            dy[l] * dy[mm]
        }
    });
    let rhs = DMatrix::from_fn(k, d, |row, i| v[(nb[row].1 + 1, i)] - v[(n + 1, i)]);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&x| x > 1e-10 * smax).count();
    if rank < d || smax == 0.0 {
        return Ok(None);
    }
    let coef = svd.solve(&rhs, 1e-12 * smax).map_err(|e| Error::Undefined(e.to_string()))?;
    let resid = (&design * &coef - &rhs).norm() / ((k * d) as f64).sqrt();
    let jacobian = coef.rows(0, d).transpose();
    Ok(Some(LocalJacobian { index: n, jacobian, residual: resid }))
}

fn quad_index(mut q: usize, d: usize) -> (usize, usize) {
    for l in 0..d {
        let span = d - l;
        if q < span {
            return (l, l + q);
        }
        q -= span;
    }
    unreachable!("quadratic index out of range")
}

/// Jacobians at every vector index in `indices` (parallel exact neighbour scans).
pub fn local_jacobians(v: &DMatrix<f64>, indices: &[usize], k: usize, theiler: usize) -> Result<Vec<Option<LocalJacobian>>> {
    indices.par_iter().map(|&n| local_jacobian(v, n, k, theiler)).collect()
}

/// ln σ_max(J_L ⋯ J_1) / L, i.e. ln of the largest eigenvalue of the Oseledec matrix.
///
/// The product is renormalized after every factor and the scale kept in log form, so the
/// value does not depend on how the product is blocked.
pub fn max_local_exponent(jacs: &[&DMatrix<f64>]) -> f64 {
    let d = jacs[0].nrows();
    let mut prod = DMatrix::<f64>::identity(d, d);
    let mut log_scale = 0.0;
    for j in jacs {
        prod = *j * prod;
        let s = prod.amax();
        if s > 0.0 {
            prod /= s;
            log_scale += s.ln();
        } else {
            return f64::NEG_INFINITY;
        }
    }
    let smax = prod.clone().svd(false, false).singular_values.max();
    (log_scale + smax.ln()) / jacs.len() as f64
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LyapunovConfig {
    pub k_neighbors: usize,
    pub n_starts: usize,
    pub theiler: usize,
    pub seed: u64,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self { k_neighbors: 0, n_starts: 100, theiler: 0, seed: 7 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LambdaPoint {
    pub l: usize,
    pub lambda: f64,
    /// Starts dropped because a Jacobian along the path was unresolved.
    pub skipped: usize,
}

/// Λ_L for each requested L, averaging the maximal local exponent over random starts.
/// The same starts are used for every L.
pub fn lambda_l(s: &ScalarSeries, emb: &Embedding, ls: &[usize], cfg: &LyapunovConfig) -> Result<Vec<LambdaPoint>> {
    let v = emb.vectors(s)?;
    let m = v.nrows();
    let l_max = *ls.iter().max().ok_or_else(|| Error::Parameter("no L values".into()))?;
    if l_max == 0 || l_max + 2 >= m {
        return Err(Error::Parameter(format!("L = {l_max} does not fit {m} vectors")));
    }
    let k = if cfg.k_neighbors == 0 { 2 * fit_unknowns(emb.d_emb) + 2 } else { cfg.k_neighbors };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let starts: Vec<usize> = (0..cfg.n_starts).map(|_| rng.random_range(0..m - l_max - 1)).collect();
    let mut needed: Vec<usize> = starts.iter().flat_map(|&n| n..n + l_max).collect();
    needed.sort_unstable();
    needed.dedup();
    let jac: HashMap<usize, Option<LocalJacobian>> =
        needed.iter().copied().zip(local_jacobians(&v, &needed, k, cfg.theiler)?).collect();
    Ok(ls
        .iter()
        .map(|&l| {
            let mut vals = Vec::new();
            for &n in &starts {
                let path: Option<Vec<&DMatrix<f64>>> = (n..n + l).map(|i| jac[&i].as_ref().map(|j| &j.jacobian)).collect();
                if let Some(path) = path {
                    let e = max_local_exponent(&path);
                    if e.is_finite() {
                        vals.push(e);
                    }
                }
            }
            let skipped = starts.len() - vals.len();
            let lambda = if vals.is_empty() { f64::NAN } else { vals.iter().sum::<f64>() / vals.len() as f64 };
            LambdaPoint { l, lambda, skipped }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaFit {
    pub lambda_inf: f64,
    pub m: f64,
    pub q: f64,
    /// RMS residual of the fit.
    pub residual: f64,
}

/// Least-squares fit of Λ_L = Λ∞ + m / L^q. For each q the problem is linear in (Λ∞, m);
/// q is scanned on (0, 4] and refined by golden-section search.
pub fn fit_lambda_inf(pairs: &[(f64, f64)]) -> Result<LambdaFit> {
    if pairs.len() < 3 {
        return Err(Error::Parameter("need at least three (L, Λ_L) pairs".into()));
    }
    if pairs.iter().any(|p| !(p.0 > 0.0) || !p.1.is_finite()) {
        return Err(Error::Parameter("L must be positive and Λ_L finite".into()));
    }
    let solve = |q: f64| -> LambdaFit {
        let x: Vec<f64> = pairs.iter().map(|p| p.0.powf(-q)).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let (a, b) = linear_fit(&x, &y);
        let rss: f64 = x.iter().zip(&y).map(|(xi, yi)| (a + b * xi - yi).powi(2)).sum();
        LambdaFit { lambda_inf: a, m: b, q, residual: (rss / pairs.len() as f64).sqrt() }
    };
    let grid: Vec<f64> = (1..=80).map(|i| 0.05 * i as f64).collect();
    let best = grid.iter().map(|&q| solve(q)).min_by(|a, b| a.residual.total_cmp(&b.residual)).expect("non-empty grid");
    let (mut lo, mut hi) = ((best.q - 0.05).max(1e-3), best.q + 0.05);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if solve(a).residual < solve(b).residual {
            hi = b;
        } else {
            lo = a;
        }
    }
    let refined = solve(0.5 * (lo + hi));
    Ok(if refined.residual <= best.residual { refined } else { best })
}

/// Periodogram |FFT(y − ȳ)|² / N for frequencies k/(N dt), k = 0..=N/2.
pub fn power_spectrum(s: &ScalarSeries) -> Result<Vec<(f64, f64)>> {
    let n = s.len();
    if n < 2 {
        return Err(Error::Parameter("power spectrum needs at least two samples".into()));
    }
    let m = s.values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = s.values.iter().map(|&v| Complex::new(v - m, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok((0..=n / 2).map(|k| (k as f64 / (n as f64 * s.dt), buf[k].norm_sqr() / n as f64)).collect())
}

/// Indices of local maxima of the power that exceed `rel` times the global maximum.
pub fn spectral_peaks(spec: &[(f64, f64)], rel: f64) -> Vec<usize> {
    let top = spec.iter().map(|p| p.1).fold(0.0, f64::max);
    (1..spec.len().saturating_sub(1))
        .filter(|&k| spec[k].1 > rel * top && spec[k].1 >= spec[k - 1].1 && spec[k].1 > spec[k + 1].1)
        .collect()
}

pub fn lambda_model(fit: &LambdaFit, l: f64) -> f64 {
    fit.lambda_inf + fit.m * l.powf(-fit.q)
}

/// AR(1) series x_{n+1} = a x_n + noise, used as a contractive reference.
pub fn ar1_series(a: f64, noise: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            x = a * x + noise * (rng.random::<f64>() - 0.5);
            x
        })
        .collect()
}

/// Geometric over arithmetic mean of the power (DC bin excluded); near 1 for broadband data.
pub fn spectral_flatness(spec: &[(f64, f64)]) -> f64 {
    let p: Vec<f64> = spec.iter().skip(1).map(|x| x.1.max(1e-300)).collect();
    let geo = (p.iter().map(|v| v.ln()).sum::<f64>() / p.len() as f64).exp();
    let arith = p.iter().sum::<f64>() / p.len() as f64;
    geo / arith
}
