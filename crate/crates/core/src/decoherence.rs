//! Closed-form amplitude and phase damping in the Fock basis.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::special::ln_binomial;

/// Largest trace drift tolerated before the result is rejected.
pub const TRACE_RESIDUE_LIMIT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingKind {
    Amplitude,
    Phase,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampingParams {
    pub kind: DampingKind,
    /// Γ (amplitude) or Γ_p (phase).
    pub rate: f64,
    pub tau: f64,
}

impl DampingParams {
    pub fn amplitude(rate: f64, tau: f64) -> Self {
        Self { kind: DampingKind::Amplitude, rate, tau }
    }

    pub fn phase(rate: f64, tau: f64) -> Self {
        Self { kind: DampingKind::Phase, rate, tau }
    }

    fn gamma_tau(&self) -> Result<f64> {
        if !(self.rate >= 0.0 && self.tau >= 0.0) {
            return Err(Error::Parameter("damping rate and time must be nonnegative".into()));
        }
        Ok(self.rate * self.tau)
    }
}

/// Damps one mode of a (possibly multi-mode) density matrix; other subsystems are spectators.
///
/// Amplitude: ρ_{n,n'} → e^{−Γτ(n+n')} Σ_r √(C(n+r,r) C(n'+r,r)) (1 − e^{−2Γτ})^r ρ_{n+r,n'+r},
/// with r running to the cutoff, which makes the channel exactly trace preserving.
/// Phase: ρ_{n,n'} → e^{−Γ_pτ(n−n')²} ρ_{n,n'}.
pub fn damp_mode(rho: &DensityMatrix, mode: usize, params: &DampingParams) -> Result<DensityMatrix> {
    let space = &rho.space;
    if mode >= space.n_subsystems() {
        return Err(Error::Subsystem { index: mode, count: space.n_subsystems() });
    }
    let gt = params.gamma_tau()?;
    if gt == 0.0 {
        return Ok(rho.clone());
    }
    let d = rho.dim();
    let multi: Vec<Vec<usize>> = (0..d).map(|i| space.multi_index(i)).collect();
    let dm = space.dims()[mode];
    // flat-index stride of the damped mode
    let stride: usize = space.dims()[mode + 1..].iter().product();

    let cols: Vec<Vec<C64>> = (0..d)
        .into_par_iter()
        .map(|j| {
            let nj = multi[j][mode];
            (0..d)
                .map(|i| {
                    let ni = multi[i][mode];
                    match params.kind {
                        DampingKind::Phase => {
                            let diff = ni as f64 - nj as f64;
                            rho.mat[(i, j)] * (-gt * diff * diff).exp()
                        }
                        DampingKind::Amplitude => {
                            let ln_loss = (-(-2.0 * gt).exp_m1()).ln();
                            let rmax = (dm - 1 - ni).min(dm - 1 - nj);
                            let mut acc = C64::new(0.0, 0.0);
                            for r in 0..=rmax {
                                let ln_w = -gt * (ni + nj) as f64
                                    + 0.5 * (ln_binomial(ni + r, r) + ln_binomial(nj + r, r))
                                    + r as f64 * ln_loss;
                                acc += rho.mat[(i + r * stride, j + r * stride)] * ln_w.exp();
                            }
                            acc
                        }
                    }
                })
                .collect()
        })
        .collect();
    let mat = DMatrix::from_fn(d, d, |i, j| cols[j][i]);
    let out = DensityMatrix { space: space.clone(), mat };
    let drift = (out.trace().re - rho.trace().re).abs();
    if drift > TRACE_RESIDUE_LIMIT {
        return Err(Error::Truncation { lost: drift, limit: TRACE_RESIDUE_LIMIT });
    }
    Ok(out)
}

pub fn amplitude_damp_single(rho: &DensityMatrix, params: &DampingParams) -> Result<DensityMatrix> {
    single(rho, params, DampingKind::Amplitude)
}

pub fn phase_damp_single(rho: &DensityMatrix, params: &DampingParams) -> Result<DensityMatrix> {
    single(rho, params, DampingKind::Phase)
}

fn single(rho: &DensityMatrix, params: &DampingParams, kind: DampingKind) -> Result<DensityMatrix> {
    if rho.space.n_subsystems() != 1 {
        return Err(Error::Dimension("single-mode channel applied to a multi-mode state".into()));
    }
    if params.kind != kind {
        return Err(Error::Parameter(format!("expected {kind:?} damping parameters")));
    }
    damp_mode(rho, 0, params)
}

/// Damping applied to subsystem A (mode 0) of a bipartite state only.
pub fn damp_bipartite_mode_a(rho: &DensityMatrix, params: &DampingParams) -> Result<DensityMatrix> {
    if rho.space.n_subsystems() != 2 {
        return Err(Error::Dimension("bipartite channel needs two subsystems".into()));
    }
    damp_mode(rho, 0, params)
}
