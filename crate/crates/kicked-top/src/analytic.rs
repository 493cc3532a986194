//! Closed-form oracles that cross-check the numerical pipeline.
//!
//! At alpha = pi/2 the Floquet operator of the low spins block-
//! diagonalizes far enough that the Loschmidt echo has a Chebyshev
//! closed form (j = 3/2 and j = 2). At alpha = pi and j = 1 the
//! operator itself has a closed m-th power, which fixes the time period
//! of every diagnostic at rational kick strengths k = r pi / s.

use num_complex::Complex64;
use num_integer::Integer;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Rational kick strength k = r pi / s in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalKick {
    pub r: i64,
    pub s: u64,
}

impl RationalKick {
    pub fn new(r: i64, s: u64) -> Result<RationalKick> {
        if s == 0 {
            return Err(Error::Domain("rational kick needs s >= 1".into()));
        }
        if r.unsigned_abs().gcd(&s) != 1 {
            return Err(Error::Domain(format!("rational kick {r}/{s} is not in lowest terms")));
        }
        Ok(RationalKick { r, s })
    }

    pub fn k(&self) -> f64 {
        self.r as f64 * PI / self.s as f64
    }
}

/// Chebyshev polynomial of the first kind by the three-term recurrence.
pub fn chebyshev_t(m: usize, x: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for _ in 1..m {
        (prev, cur) = (cur, 2.0 * x * cur - prev);
    }
    cur
}

/// Chebyshev polynomial of the second kind; accepts m = -1 (which is 0).
pub fn chebyshev_u(m: isize, x: f64) -> f64 {
    if m < 0 {
        return 0.0;
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..m {
        (prev, cur) = (cur, 2.0 * x * cur - prev);
    }
    cur
}

/// alpha_m, beta_m entering the echo closed forms. `frac` is the angle
/// divisor: k/3 for j = 3/2 and k/2 for j = 2, with chi = sin(k/frac)/2.
fn le_amplitudes(k: f64, m: usize, frac: f64) -> (Complex64, Complex64) {
    let angle = k / frac;
    let chi = angle.sin() / 2.0;
    let t = chebyshev_t(m, chi);
    let u = chebyshev_u(m as isize - 1, chi);
    let alpha = Complex64::new(t, 0.5 * u * angle.cos());
    let beta = Complex64::from_polar(1.0, angle) * (3f64.sqrt() / 2.0 * u);
    (alpha, beta)
}

/// alpha_m, beta_m for the j = 3/2 echo (chi = sin(k/3)/2).
pub fn le_amplitudes_j32(k: f64, m: usize) -> (Complex64, Complex64) {
    le_amplitudes(k, m, 3.0)
}

/// alpha_m, beta_m for the j = 2 echo (chi = sin(k/2)/2).
pub fn le_amplitudes_j2(k: f64, m: usize) -> (Complex64, Complex64) {
    le_amplitudes(k, m, 2.0)
}

/// 2 Re(alpha alphat*) + 2 Re(beta betat*): the real pairing common to
/// both closed forms.
fn pairing(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> f64 {
    2.0 * (a.0 * b.0.conj()).re + 2.0 * (a.1 * b.1.conj()).re
}

/// Closed-form Loschmidt echo for j = 3/2, alpha = pi/2.
///
/// The 4x4 evolution splits into two identical 2x2 blocks, each with
/// trace alpha_m + alpha_m*..., giving Tr(U'^{-m} U^m) = 2 Sigma with
/// Sigma = 2Re(alpha_m alphat_m*) + 2Re(beta_m betat_m*); the returned
/// value is the fully normalized echo (d + |Tr|^2) / (d(d+1)).
pub fn le_analytic_j32(k: f64, k_prime: f64, m: usize) -> f64 {
    let sigma = pairing(le_amplitudes_j32(k, m), le_amplitudes_j32(k_prime, m));
    (4.0 + 4.0 * sigma * sigma) / 20.0
}

/// Closed-form Loschmidt echo for j = 2, alpha = pi/2, perturbation dk.
///
/// F = (5 + |1 + e^{i m dk/4} Sigma + 2 e^{3 i m dk/8} c_m|^2) / 30 with
/// c_m = 1 for even m and cos(3 dk/8) for odd m. The three terms are the
/// traces of the parity blocks of U'^{-m} U^m: a decoupled phase, the
/// even-parity 2x2 block, and the odd-parity anti-diagonal 2x2 block.
pub fn le_analytic_j2(k: f64, dk: f64, m: usize) -> f64 {
    let sigma = pairing(le_amplitudes_j2(k, m), le_amplitudes_j2(k + dk, m));
    let mf = m as f64;
    let c_m = if m.is_multiple_of(2) { 1.0 } else { (3.0 * dk / 8.0).cos() };
    let inner = Complex64::new(1.0, 0.0)
        + Complex64::from_polar(1.0, mf * dk / 4.0) * sigma
        + Complex64::from_polar(1.0, 3.0 * mf * dk / 8.0) * (2.0 * c_m);
    (5.0 + inner.norm_sqr()) / 30.0
}

/// U^m for j = 1, alpha = pi in closed form:
/// corners alpha_m = ((e^{-ik/2})^m + (-e^{-ik/2})^m)/2 on the diagonal,
/// beta_m = ((e^{-ik/2})^m - (-e^{-ik/2})^m)/2 on the anti-diagonal,
/// center (-1)^m. Exactly one of alpha_m, beta_m is nonzero at each m.
pub fn special_unitary_power(k: f64, m: usize) -> CMat {
    let base = Complex64::from_polar(1.0, -k / 2.0);
    let plus = base.powu(m as u32);
    let minus = (-base).powu(m as u32);
    let alpha = (plus + minus) / 2.0;
    let beta = (plus - minus) / 2.0;
    let center = if m.is_multiple_of(2) { 1.0 } else { -1.0 };

    let mut u = CMat::zeros((3, 3));
    u[[0, 0]] = alpha;
    u[[2, 2]] = alpha;
    u[[0, 2]] = beta;
    u[[2, 0]] = beta;
    u[[1, 1]] = Complex64::new(center, 0.0);
    u
}

/// Stroboscopic time period at alpha = pi and k = r pi / s:
/// 4s when r is odd, 2s when r is even.
pub fn time_period_alpha_pi(kick: RationalKick) -> u64 {
    if kick.r.rem_euclid(2) == 1 {
        4 * kick.s
    } else {
        2 * kick.s
    }
}
