//! Single-parameter spectrum sweeps within one conserved-charge sector.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eigh, sector_hamiltonians, HamiltonianSpec, SectorEigen};
use crate::error::{Error, Result};
use crate::fock::ModeSpace;

/// Energies closer than this (relative to the block scale) count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepParam {
    pub name: String,
    pub values: Vec<f64>,
}

impl SweepParam {
    /// start, start+step, ... for `count` values.
    pub fn stepped(name: &str, start: f64, step: f64, count: usize) -> Self {
        Self { name: name.into(), values: (0..count).map(|i| start + step * i as f64).collect() }
    }
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub param: f64,
    pub spec: HamiltonianSpec,
    pub eigen: SectorEigen,
}

impl HamiltonianSpec {
    /// Copy with one named scalar parameter replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Result<HamiltonianSpec> {
        let mut s = self.clone();
        let slot = match (&mut s, name) {
            (HamiltonianSpec::KerrCubic { chi1, .. }, "chi1") => chi1,
            (HamiltonianSpec::KerrCubic { chi2, .. }, "chi2") => chi2,
            (HamiltonianSpec::Bec { omega0, .. }, "omega0") => omega0,
            (HamiltonianSpec::Bec { omega1, .. }, "omega1") => omega1,
            (HamiltonianSpec::Bec { u, .. }, "u") => u,
            (HamiltonianSpec::Bec { lambda, .. }, "lambda") => lambda,
            (HamiltonianSpec::AtomField { omega_f, .. }, "omega_f") => omega_f,
            (HamiltonianSpec::AtomField { omega_a, .. }, "omega_a") => omega_a,
            (HamiltonianSpec::AtomField { gamma, .. }, "gamma") => gamma,
            (HamiltonianSpec::AtomField { g, .. }, "g") => g,
            (HamiltonianSpec::TavisCummings { omega_f, .. }, "omega_f") => omega_f,
            (HamiltonianSpec::TavisCummings { chi, .. }, "chi") => chi,
            (HamiltonianSpec::TavisCummings { lambda, .. }, "lambda") => lambda,
            (HamiltonianSpec::TavisCummings { lambda_s, .. }, "lambda_s") => lambda_s,
            (HamiltonianSpec::Djc { chi_f, .. } | HamiltonianSpec::Dtc { chi_f, .. }, "chi_f") => chi_f,
            (HamiltonianSpec::Djc { chi0, .. } | HamiltonianSpec::Dtc { chi0, .. }, "chi0") => chi0,
            (HamiltonianSpec::Djc { g0, .. } | HamiltonianSpec::Dtc { g0, .. }, "g0") => g0,
            (HamiltonianSpec::NmrSpin { chi_s }, "chi_s") => chi_s,
            _ => return Err(Error::Parameter(format!("model has no sweepable parameter '{name}'"))),
        };
        *slot = value;
        Ok(s)
    }

    /// The coupling part of H per unit coupling constant, used to order degenerate levels.
    fn coupling_model(&self) -> HamiltonianSpec {
        match self {
            HamiltonianSpec::Bec { .. } => HamiltonianSpec::Bec { omega0: 0.0, omega1: 0.0, u: 1e-300, lambda: 1.0 },
            HamiltonianSpec::AtomField { .. } => {
                HamiltonianSpec::AtomField { omega_f: 0.0, omega_a: 0.0, gamma: 1e-300, g: 1.0 }
            }
            HamiltonianSpec::TavisCummings { omegas, .. } => HamiltonianSpec::TavisCummings {
                omega_f: 0.0,
                chi: 0.0,
                omegas: vec![0.0; omegas.len()],
                lambda: 1.0,
                lambda_s: 0.0,
            },
            HamiltonianSpec::Djc { .. } => HamiltonianSpec::Djc { chi_f: 0.0, chi0: 0.0, g0: 1.0 },
            HamiltonianSpec::Dtc { .. } => HamiltonianSpec::Dtc { chi_f: 0.0, chi0: 0.0, g0: 1.0 },
            other => other.clone(),
        }
    }
}

/// Eigensystem of one sector, with exactly degenerate levels split by the coupling
/// operator: inside a degenerate cluster the states are eigenvectors of the coupling,
/// ascending in its eigenvalue, i.e. the ordering that a small positive coupling would
/// produce.
pub fn sector_eigensystem(spec: &HamiltonianSpec, space: &ModeSpace, charge: &[usize]) -> Result<SectorEigen> {
    let blocks = sector_hamiltonians(spec, space)?;
    let (c, indices, h, complete) = blocks
        .into_iter()
        .find(|b| b.0 == charge)
        .ok_or_else(|| Error::Parameter(format!("no sector with charge {charge:?}")))?;
    let (energies, mut vectors) = eigh(&h);
    let coupling = sector_hamiltonians(&spec.coupling_model(), space)?
        .into_iter()
        .find(|b| b.0 == charge)
        .map(|b| b.2)
        .expect("same sector layout");
    let scale = energies.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    let mut start = 0;
    while start < energies.len() {
        let mut end = start + 1;
        while end < energies.len() && energies[end] - energies[start] < DEGENERACY_TOL * scale {
            end += 1;
        }
        if end - start > 1 {
            let q = vectors.columns(start, end - start).into_owned();
            let w: DMatrix<C64> = q.adjoint() * &coupling * &q;
            let (_, rot) = eigh(&w);
            let fixed = q * rot;
            vectors.columns_mut(start, end - start).copy_from(&fixed);
        }
        start = end;
    }
    Ok(SectorEigen { charge: c, indices, energies, vectors, complete })
}

/// Sector spectrum at each value of one parameter (points evaluated in parallel).
pub fn spectrum_sweep(base: &HamiltonianSpec, param: &SweepParam, space: &ModeSpace, charge: &[usize]) -> Result<Vec<SweepPoint>> {
    param
        .values
        .par_iter()
        .map(|&v| {
            let spec = base.with_param(&param.name, v)?;
            let eigen = sector_eigensystem(&spec, space, charge)?;
            Ok(SweepPoint { param: v, spec, eigen })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stepped_values() {
        let p = SweepParam::stepped("omega1", -0.99, 0.02, 100);
        assert_eq!(p.values.len(), 100);
        assert!((p.values[99] - 0.99).abs() < 1e-12);
    }

    #[test]
    fn with_param_rejects_unknown_names() {
        let s = HamiltonianSpec::Bec { omega0: 1.0, omega1: 0.0, u: 1.0, lambda: 0.25 };
        assert!(s.with_param("g", 1.0).is_err());
        assert_eq!(s.with_param("omega1", 0.5).unwrap(), HamiltonianSpec::Bec { omega0: 1.0, omega1: 0.5, u: 1.0, lambda: 0.25 });
    }

    #[test]
    fn bec_reflection_symmetry_of_levels() {
        let (w0, u) = (1.0, 1.0);
        let spec = HamiltonianSpec::Bec { omega0: w0, omega1: 0.37, u, lambda: 0.25 };
        let n = 4usize;
        let e = sector_eigensystem(&spec, &ModeSpace::two_mode(n, n), &[n]).unwrap().energies;
        let nf = n as f64;
        for k in 0..=n {
            assert!((e[k] + e[n - k] - 2.0 * (w0 * nf + u * nf * nf)).abs() < 1e-10);
        }
    }
}
