//! Revival times and exact evolution at rational fractions of them.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::HamiltonianSpec;
use crate::error::{Error, Result};
use crate::fock::PureState;
use crate::special::{gcd, rationalize};

/// Largest denominator accepted when deciding whether a ratio of rates is rational.
pub const MAX_DENOMINATOR: u128 = 1_000_000_000;
pub const RATIONAL_TOL: f64 = 1e-12;

/// Energies of the Kerr/cubic model at the revival time, as integer multiples of π.
///
/// With χ₂/χ₁ = p/q in lowest terms, T_rev = π LCM(1/χ₁, 1/χ₂) = πq/χ₁, and
/// E_n T_rev = π (q n(n−1) + p n(n−1)(n−2)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RevivalClock {
    pub c1: u128,
    pub c2: u128,
    /// T_rev / π.
    pub period_over_pi: f64,
}

impl RevivalClock {
    pub fn kerr_cubic(chi1: f64, chi2: f64) -> Option<Self> {
        if chi1 < 0.0 || chi2 < 0.0 {
            return None;
        }
        match (chi1 > 0.0, chi2 > 0.0) {
            (false, false) => None,
            (true, false) => Some(Self { c1: 1, c2: 0, period_over_pi: 1.0 / chi1 }),
            (false, true) => Some(Self { c1: 0, c2: 1, period_over_pi: 1.0 / chi2 }),
            (true, true) => {
                let (p, q) = rationalize(chi2 / chi1, MAX_DENOMINATOR, RATIONAL_TOL)?;
                Some(Self { c1: q, c2: p, period_over_pi: q as f64 / chi1 })
            }
        }
    }

    pub fn period(&self) -> f64 {
        PI * self.period_over_pi
    }

    /// exp(−iH t)|ψ> at t = (num/den)·T_rev with phases reduced in integer arithmetic.
    pub fn evolve_fraction(&self, psi: &PureState, num: u64, den: u64) -> Result<PureState> {
        if psi.space.n_subsystems() != 1 || den == 0 || den > u32::MAX as u64 {
            return Err(Error::Parameter("fractional evolution needs one mode and 0 < den < 2^32".into()));
        }
        let g = gcd(num as u128, den as u128).max(1);
        let (num, den) = (num as u128 / g, den as u128 / g);
        let modulus = 2 * den;
        let amps = DVector::from_iterator(
            psi.dim(),
            psi.amps.iter().enumerate().map(|(n, c)| {
                let n = n as u128;
                let k2 = n * n.saturating_sub(1);
                let k3 = k2 * n.saturating_sub(2);
                // phase = −π num (c1 k2 + c2 k3) / den, taken mod 2π exactly
                let r = (mulmod(num, (mulmod(self.c1, k2, modulus) + mulmod(self.c2, k3, modulus)) % modulus, modulus)) as f64;
                c * C64::from_polar(1.0, -PI * r / den as f64)
            }),
        );
        Ok(PureState { space: psi.space.clone(), amps })
    }
}

fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    ((a % m) * (b % m)) % m
}

/// Revival time of a model, or `None` when no exact revival exists.
///
/// Kerr/cubic: π·LCM(1/χ₁, 1/χ₂), `None` for an irrational ratio. BEC: π/U provided
/// ω₀ = mU and λ₁ = √(ω₁² + λ²) = m′U with integers m, m′ of odd sum.
pub fn revival_time(spec: &HamiltonianSpec) -> Option<f64> {
    match spec {
        HamiltonianSpec::KerrCubic { chi1, chi2 } => RevivalClock::kerr_cubic(*chi1, *chi2).map(|c| c.period()),
        HamiltonianSpec::Bec { omega0, omega1, u, lambda } => {
            let l1 = omega1.hypot(*lambda);
            let as_int = |x: f64| {
                let r = x.round();
                ((x - r).abs() < 1e-9 * x.abs().max(1.0)).then_some(r as i64)
            };
            let m = as_int(omega0 / u)?;
            let mp = as_int(l1 / u)?;
            ((m + mp).rem_euclid(2) == 1).then_some(PI / u)
        }
        _ => None,
    }
}
