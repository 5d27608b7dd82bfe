//! Factorials, binomials, Laguerre and Hermite polynomials, Simpson quadrature.
//!
//! Everything that can overflow past n≈170 is carried in logarithms.

use std::sync::OnceLock;

const LN_FACT_TABLE: usize = 4096;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; LN_FACT_TABLE];
        for n in 1..LN_FACT_TABLE {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

/// ln(n!)
pub fn ln_factorial(n: usize) -> f64 {
    if n < LN_FACT_TABLE {
        ln_fact_table()[n]
    } else {
        // Stirling series, far past any cutoff used here
        let x = n as f64;
        x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
    }
}

pub fn factorial(n: usize) -> f64 {
    ln_factorial(n).exp()
}

/// ln C(n, k); -inf when k > n.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        0.0
    } else {
        ln_binomial(n, k).exp().round_if_small()
    }
}

trait RoundIfSmall {
    fn round_if_small(self) -> Self;
}

impl RoundIfSmall for f64 {
    // Binomials below 2^52 are integers; strip the exp/ln noise.
    fn round_if_small(self) -> f64 {
        if self < 4.0e15 {
            self.round()
        } else {
            self
        }
    }
}

/// ln L_m(-y) for y >= 0.
///
/// All terms of L_m(-y) = sum_j C(m, j) y^j / j! are positive, so a running log-sum
/// is exact up to rounding and never overflows.
pub fn ln_laguerre_neg(m: usize, y: f64) -> f64 {
    assert!(y >= 0.0, "ln_laguerre_neg needs y >= 0");
    if y == 0.0 {
        return 0.0;
    }
    let ly = y.ln();
    let terms: Vec<f64> = (0..=m)
        .map(|j| ln_binomial(m, j) + j as f64 * ly - ln_factorial(j))
        .collect();
    log_sum_exp(&terms)
}

/// L_m(x) by the three-term recurrence (any sign of x, moderate m).
pub fn laguerre(m: usize, x: f64) -> f64 {
    let mut l0 = 1.0;
    if m == 0 {
        return l0;
    }
    let mut l1 = 1.0 - x;
    for k in 1..m {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 - x) * l1 - kf * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Physicists' Hermite polynomial H_n(x), unscaled.
///
/// Only for the moment inversion, which needs the raw polynomial and keeps n small.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * x;
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Composite Simpson weights for `n` (odd, >= 3) equally spaced samples of step `h`.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd number of points >= 3");
    (0..n)
        .map(|i| {
            let c = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

pub fn simpson(values: &[f64], h: f64) -> f64 {
    simpson_weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Greatest common divisor on u128.
pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Rational reconstruction p/q of a float, q <= max_den.
///
/// Every double is a rational number, so "rational" here means the continued fraction
/// reaches a convergent within relative `tol` of x and the next partial quotient is
/// either absent or huge (>= 1000), i.e. what remains is rounding noise. Irrationals
/// such as sqrt(2) keep producing small quotients and are rejected.
pub fn rationalize(x: f64, max_den: u128, tol: f64) -> Option<(u128, u128)> {
    if !(x.is_finite() && x > 0.0) {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e30 {
            break;
        }
        let a = a as u128;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - r.floor();
        let close = ((p1 as f64 / q1 as f64 - x) / x).abs() <= tol;
        if frac == 0.0 {
            return close.then_some((p1, q1));
        }
        r = 1.0 / frac;
        if close && r >= 1000.0 {
            return Some((p1, q1));
        }
    }
    None
}
