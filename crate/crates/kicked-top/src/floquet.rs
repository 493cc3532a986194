//! Floquet operator of the kicked top and its spectral bookkeeping.
//!
//! One period is U(k) = D(k) R(alpha): a linear rotation by alpha about
//! J_y followed by the torsional kick D(k) = exp(-i k J_z^2 / 2j), which
//! is diagonal in the J_z basis with entries exp(-i k m^2 / 2j).
//!
//! Shifting the kick strength by kappa_j (4 pi j for integer j, 2 pi j
//! for half-integer j) multiplies every diagonal kick phase by the same
//! scalar, so U(k + kappa_j) = z U(k) with |z| = 1 and every
//! state-independent measure repeats exactly.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::spinops::{self, Spin};

/// Parameters of one kicked-top Floquet operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetParams {
    pub spin: Spin,
    /// Rotation angle about J_y.
    pub alpha: f64,
    /// Kick strength.
    pub k: f64,
}

impl FloquetParams {
    pub fn new(spin: Spin, alpha: f64, k: f64) -> Result<FloquetParams> {
        if !alpha.is_finite() || !k.is_finite() {
            return Err(Error::Domain("alpha and k must be finite".into()));
        }
        Ok(FloquetParams { spin, alpha, k })
    }

    pub fn with_k(self, k: f64) -> FloquetParams {
        FloquetParams { k, ..self }
    }
}

/// Builds U = D(k) R(alpha) in the J_z basis.
pub fn build_floquet(params: &FloquetParams) -> Result<CMat> {
    let spin = params.spin;
    let rotation = spinops::expm_unitary(&spinops::jy_matrix(spin), params.alpha)?;
    let tj = spin.twice_j() as f64;
    let mut u = rotation;
    for (n, m) in spin.m_values().into_iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -params.k * m * m / tj);
        for c in 0..spin.dim() {
            u[[n, c]] *= phase;
        }
    }
    Ok(u)
}

/// U^m by repeated multiplication, with periodic unitarity rechecks.
///
/// m is capped at 10^4; every 100 multiplications the product is tested
/// for unitarity drift beyond 1e-9, which aborts with a numerical error
/// rather than returning a silently degraded matrix.
pub fn floquet_power(u: &CMat, m: usize) -> Result<CMat> {
    if m > 10_000 {
        return Err(Error::Domain(format!("floquet_power: m = {m} exceeds the 10^4 cap")));
    }
    let d = u.nrows();
    let mut acc = CMat::eye(d);
    for step in 1..=m {
        acc = u.dot(&acc);
        if step % 100 == 0 {
            let drift = linalg::unitarity_defect(&acc);
            if drift > 1e-9 {
                return Err(Error::Numerical(format!(
                    "unitarity drift {drift:.3e} after {step} multiplications"
                )));
            }
        }
    }
    Ok(acc)
}

/// The kick-strength repeat interval kappa_j: 4 pi j for integer j,
/// 2 pi j for half-integer j.
pub fn kappa_period(spin: Spin) -> f64 {
    if spin.is_integer() {
        4.0 * PI * spin.j()
    } else {
        2.0 * PI * spin.j()
    }
}

/// Result of comparing U(k + shift) against z * U(k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrefactorCheck {
    /// The two operators agree elementwise (to 1e-12) after dividing out z.
    Scalar(Complex64),
    NotScalar,
}

/// Tests whether `shifted` is a global phase times `base`.
///
/// The candidate z is read off the largest-magnitude entry of `base`,
/// then every element must satisfy |shifted - z * base| <= 1e-12.
pub fn prefactor_scalar(base: &CMat, shifted: &CMat) -> PrefactorCheck {
    let mut z = Complex64::new(0.0, 0.0);
    let mut best = 0.0;
    for (b, _) in base.iter().zip(shifted.iter()) {
        if b.norm() > best {
            best = b.norm();
        }
    }
    if best == 0.0 {
        return PrefactorCheck::NotScalar;
    }
    for (b, s) in base.iter().zip(shifted.iter()) {
        if b.norm() == best {
            z = s / b;
            break;
        }
    }
    let ok = base
        .iter()
        .zip(shifted.iter())
        .all(|(b, s)| (s - z * b).norm() <= 1e-12);
    if ok {
        PrefactorCheck::Scalar(z)
    } else {
        PrefactorCheck::NotScalar
    }
}

/// Quasienergy phases sorted ascending in (-pi, pi].
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiEnergySpectrum {
    pub phases: Vec<f64>,
}

impl QuasiEnergySpectrum {
    /// The same phases folded modulo pi into (-pi/2, pi/2], sorted ascending.
    ///
    /// Folding identifies U with -U; it is the natural window when the
    /// operator is only defined up to a global sign.
    pub fn folded_mod_pi(&self) -> Vec<f64> {
        let mut folded: Vec<f64> = self.phases.iter().map(|&p| fold_mod_pi(p)).collect();
        folded.sort_by(|a, b| a.partial_cmp(b).unwrap());
        folded
    }
}

/// Maps a phase into (-pi/2, pi/2] by shifting multiples of pi.
pub fn fold_mod_pi(phase: f64) -> f64 {
    let mut p = phase;
    while p > PI / 2.0 {
        p -= PI;
    }
    while p <= -PI / 2.0 {
        p += PI;
    }
    p
}

/// Eigenphases of a unitary, as principal arguments in (-pi, pi].
pub fn quasienergies(u: &CMat) -> Result<QuasiEnergySpectrum> {
    let defect = linalg::unitarity_defect(u);
    if defect > 1e-9 {
        return Err(Error::Contract(format!(
            "quasienergies requires a unitary matrix (defect {defect:.3e})"
        )));
    }
    let eigs = linalg::eigvals(u)?;
    let mut phases: Vec<f64> = eigs
        .into_iter()
        .map(|z| {
            let mut p = z.arg();
            if p <= -PI {
                p += 2.0 * PI;
            }
            p
        })
        .collect();
    phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(QuasiEnergySpectrum { phases })
}
