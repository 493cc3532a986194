//! Exact spin-j angular momentum algebra.
//!
//! Every matrix in the crate lives in the J_z eigenbasis with m ordered
//! j, j-1, ..., -j (basis index n corresponds to m = j - n). Half-integer
//! spins are represented exactly by storing 2j as an integer.

use ndarray::prelude::*;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

/// Angular momentum quantum number, stored exactly as 2j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spin {
    twice_j: u32,
}

impl Spin {
    pub fn new(twice_j: u32) -> Result<Spin> {
        if twice_j == 0 {
            return Err(Error::Domain("spin requires 2j >= 1".into()));
        }
        Ok(Spin { twice_j })
    }

    pub fn twice_j(&self) -> u32 {
        self.twice_j
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    /// Hilbert space dimension d = 2j + 1.
    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    pub fn is_integer(&self) -> bool {
        self.twice_j.is_multiple_of(2)
    }

    /// The m quantum numbers in basis order: j, j-1, ..., -j.
    pub fn m_values(&self) -> Vec<f64> {
        let j = self.j();
        (0..self.dim()).map(|n| j - n as f64).collect()
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

impl FromStr for Spin {
    type Err = Error;

    /// Parses "2" (j = 2) or "3/2" (j = 3/2). Fractions must have
    /// denominator 2 and an odd numerator, so every spin has one spelling.
    fn from_str(s: &str) -> Result<Spin> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad spin numerator in '{s}'")))?;
            if den.trim() != "2" {
                return Err(Error::Domain(format!("spin '{s}': only halves are allowed (e.g. 3/2)")));
            }
            if num.is_multiple_of(2) {
                return Err(Error::Domain(format!("spin '{s}': write integer spins without the /2")));
            }
            Spin::new(num)
        } else {
            let whole: u32 = s
                .parse()
                .map_err(|_| Error::Domain(format!("bad spin '{s}': expected N or N/2")))?;
            Spin::new(2 * whole)
        }
    }
}

/// Direction (theta, phi) on the sphere labelling a spin-coherent state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentAngles {
    pub theta: f64,
    pub phi: f64,
}

impl CoherentAngles {
    /// theta must lie in [0, pi]; phi is wrapped into [0, 2*pi).
    pub fn new(theta: f64, phi: f64) -> Result<CoherentAngles> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::Domain("coherent angles must be finite".into()));
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::Domain(format!("theta = {theta} outside [0, pi]")));
        }
        let phi = phi.rem_euclid(2.0 * std::f64::consts::PI);
        Ok(CoherentAngles { theta, phi })
    }
}

/// J_z = diag(j, j-1, ..., -j).
pub fn jz_matrix(spin: Spin) -> CMat {
    let d = spin.dim();
    let mut m = CMat::zeros((d, d));
    for (n, mv) in spin.m_values().into_iter().enumerate() {
        m[[n, n]] = Complex64::new(mv, 0.0);
    }
    m
}

/// Ladder operators (J_+, J_-) with <j,m±1|J_±|j,m> = sqrt(j(j+1) - m(m±1)).
pub fn jpm_matrices(spin: Spin) -> (CMat, CMat) {
    let d = spin.dim();
    let j = spin.j();
    let mv = spin.m_values();
    let mut jp = CMat::zeros((d, d));
    // J_+ |j,m> lands on |j,m+1>, i.e. one basis index up the ordering.
    for n in 1..d {
        let m = mv[n];
        jp[[n - 1, n]] = Complex64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.t().mapv(|z| z.conj());
    (jp, jm)
}

/// J_x = (J_+ + J_-)/2.
pub fn jx_matrix(spin: Spin) -> CMat {
    let (jp, jm) = jpm_matrices(spin);
    (&jp + &jm).mapv(|z| z * 0.5)
}

/// J_y = (J_+ - J_-)/(2i).
pub fn jy_matrix(spin: Spin) -> CMat {
    let (jp, jm) = jpm_matrices(spin);
    let half_over_i = Complex64::new(0.0, -0.5);
    (&jp - &jm).mapv(|z| z * half_over_i)
}

/// Spin-coherent state pointing along (theta, phi).
///
/// Amplitudes come from the binomial closed form
/// amp_n = sqrt(C(2j, n)) cos(theta/2)^(2j-n) sin(theta/2)^n e^(i n phi),
/// evaluated through log-magnitudes so large j cannot overflow.
pub fn coherent_state(spin: Spin, angles: CoherentAngles) -> CVec {
    let d = spin.dim();
    let tj = spin.twice_j() as f64;
    let c = (angles.theta / 2.0).cos();
    let s = (angles.theta / 2.0).sin();

    let mut amp = CVec::zeros(d);
    // cumulative log-binomial: ln C(2j, n)
    let mut ln_binom = 0.0f64;
    for n in 0..d {
        let nn = n as f64;
        let mag = if (c == 0.0 && n + 1 < d) || (s == 0.0 && n > 0) {
            0.0
        } else {
            let ln_c = if c > 0.0 { (tj - nn) * c.ln() } else { 0.0 };
            let ln_s = if s > 0.0 { nn * s.ln() } else { 0.0 };
            (0.5 * ln_binom + ln_c + ln_s).exp()
        };
        amp[n] = Complex64::from_polar(mag, nn * angles.phi);
        if n + 1 < d {
            ln_binom += ((tj - nn) / (nn + 1.0)).ln();
        }
    }

    // The closed form is normalized analytically; renormalize to strip roundoff.
    let norm = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amp.mapv(|z| z / norm)
}

/// exp(-i t H) for Hermitian H, via eigendecomposition.
pub fn expm_unitary(h: &CMat, t: f64) -> Result<CMat> {
    let defect = linalg::hermiticity_defect(h);
    if defect > 1e-12 {
        return Err(Error::Contract(format!(
            "expm_unitary requires a Hermitian matrix (defect {defect:.3e} > 1e-12)"
        )));
    }
    let (w, v) = linalg::eigh(h)?;
    let d = h.nrows();
    let mut scaled = v.clone();
    for c in 0..d {
        let phase = Complex64::from_polar(1.0, -t * w[c]);
        for r in 0..d {
            scaled[[r, c]] *= phase;
        }
    }
    Ok(scaled.dot(&v.t().mapv(|z| z.conj())))
}

/// GOE sample A = (G + G^T)/2 with G i.i.d. standard normal.
///
/// Uses the ChaCha8 stream cipher as PRNG so a seed reproduces the same
/// matrix on every platform. Diagonal variance 1, off-diagonal 1/2.
pub fn goe_sample(dim: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Array2::<f64>::zeros((dim, dim));
    for r in 0..dim {
        for c in 0..dim {
            g[[r, c]] = StandardNormal.sample(&mut rng);
        }
    }
    let mut a = CMat::zeros((dim, dim));
    for r in 0..dim {
        for c in 0..dim {
            a[[r, c]] = Complex64::new(0.5 * (g[[r, c]] + g[[c, r]]), 0.0);
        }
    }
    a
}

/// <psi| A |psi> for Hermitian A (returns the real part after a residue check).
pub fn expectation(state: &CVec, a: &CMat) -> f64 {
    let av = a.dot(state);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in state.iter().zip(av.iter()) {
        acc += x.conj() * y;
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn commutator(a: &CMat, b: &CMat) -> CMat {
        a.dot(b) - b.dot(a)
    }

    #[test]
    fn spin_parsing() {
        assert_eq!("2".parse::<Spin>().unwrap().twice_j(), 4);
        assert_eq!("3/2".parse::<Spin>().unwrap().twice_j(), 3);
        assert_eq!("1/2".parse::<Spin>().unwrap().dim(), 2);
        assert!("4/2".parse::<Spin>().is_err());
        assert!("0".parse::<Spin>().is_err());
        assert!("x".parse::<Spin>().is_err());
        assert_eq!("3/2".parse::<Spin>().unwrap().to_string(), "3/2");
        assert_eq!("2".parse::<Spin>().unwrap().to_string(), "2");
    }

    #[test]
    fn jz_defining_representations() {
        let half = Spin::new(1).unwrap();
        let jz = jz_matrix(half);
        assert_eq!(jz[[0, 0]], Complex64::new(0.5, 0.0));
        assert_eq!(jz[[1, 1]], Complex64::new(-0.5, 0.0));

        let one = Spin::new(2).unwrap();
        let jz = jz_matrix(one);
        for (n, want) in [1.0, 0.0, -1.0].iter().enumerate() {
            assert_eq!(jz[[n, n]], Complex64::new(*want, 0.0));
        }

        let two = Spin::new(4).unwrap();
        let jz = jz_matrix(two);
        let trace: Complex64 = (0..5).map(|n| jz[[n, n]]).sum();
        assert_abs_diff_eq!(trace.re, 0.0, epsilon = 1e-15);
        assert_eq!(jz[[0, 0]].re, 2.0);
    }

    #[test]
    fn ladder_entries() {
        let half = Spin::new(1).unwrap();
        let (jp, _) = jpm_matrices(half);
        assert_abs_diff_eq!(jp[[0, 1]].re, 1.0, epsilon = 1e-15);

        let one = Spin::new(2).unwrap();
        let (jp, _) = jpm_matrices(one);
        assert_abs_diff_eq!(jp[[0, 1]].re, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(jp[[1, 2]].re, 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn su2_closure_and_casimir() {
        for twice_j in [1u32, 2, 3, 4, 5, 6, 7, 8, 40, 80] {
            let spin = Spin::new(twice_j).unwrap();
            let (jx, jy, jz) = (jx_matrix(spin), jy_matrix(spin), jz_matrix(spin));
            let i = Complex64::new(0.0, 1.0);

            let comm = commutator(&jx, &jy) - jz.mapv(|z| z * i);
            assert!(comm.iter().all(|z| z.norm() < 1e-12), "2j = {twice_j}");
            let comm = commutator(&jy, &jz) - jx.mapv(|z| z * i);
            assert!(comm.iter().all(|z| z.norm() < 1e-12));
            let comm = commutator(&jz, &jx) - jy.mapv(|z| z * i);
            assert!(comm.iter().all(|z| z.norm() < 1e-12));

            let j = spin.j();
            let casimir = jx.dot(&jx) + jy.dot(&jy) + jz.dot(&jz);
            for r in 0..spin.dim() {
                for c in 0..spin.dim() {
                    let want = if r == c { j * (j + 1.0) } else { 0.0 };
                    assert!((casimir[[r, c]] - Complex64::new(want, 0.0)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn coherent_poles_and_equator() {
        let spin = Spin::new(4).unwrap();
        let north = coherent_state(spin, CoherentAngles::new(0.0, 1.3).unwrap());
        assert_abs_diff_eq!(north[0].norm(), 1.0, epsilon = 1e-15);
        let south = coherent_state(spin, CoherentAngles::new(std::f64::consts::PI, 0.4).unwrap());
        assert_abs_diff_eq!(south[4].norm(), 1.0, epsilon = 1e-15);

        let half = Spin::new(1).unwrap();
        let eq = coherent_state(half, CoherentAngles::new(std::f64::consts::FRAC_PI_2, 0.0).unwrap());
        assert_abs_diff_eq!(eq[0].re, 1.0 / 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(eq[1].re, 1.0 / 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn coherent_expectation_vector() {
        for (twice_j, theta, phi) in [(2u32, 0.7, 1.1), (3, 2.1, 4.9), (40, 1.2, 0.3), (120, 0.9, 5.8)] {
            let spin = Spin::new(twice_j).unwrap();
            let st = coherent_state(spin, CoherentAngles::new(theta, phi).unwrap());
            let j = spin.j();
            let ex = expectation(&st, &jx_matrix(spin));
            let ey = expectation(&st, &jy_matrix(spin));
            let ez = expectation(&st, &jz_matrix(spin));
            assert_abs_diff_eq!(ex, j * theta.sin() * phi.cos(), epsilon = 1e-10 * j.max(1.0));
            assert_abs_diff_eq!(ey, j * theta.sin() * phi.sin(), epsilon = 1e-10 * j.max(1.0));
            assert_abs_diff_eq!(ez, j * theta.cos(), epsilon = 1e-10 * j.max(1.0));
        }
    }

    #[test]
    fn expm_basics() {
        let spin = Spin::new(4).unwrap();
        let jy = jy_matrix(spin);
        let id = expm_unitary(&jy, 0.0).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((id[[r, c]] - Complex64::new(want, 0.0)).norm() < 1e-13);
            }
        }

        // integer j: exp(-i 2 pi J_z) = identity
        let jz = jz_matrix(spin);
        let full_turn = expm_unitary(&jz, 2.0 * std::f64::consts::PI).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((full_turn[[r, c]] - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }

        assert!(crate::linalg::unitarity_defect(&expm_unitary(&jy, 0.77).unwrap()) < 1e-12);
    }

    #[test]
    fn expm_additivity() {
        let spin = Spin::new(3).unwrap();
        let jy = jy_matrix(spin);
        let a = expm_unitary(&jy, 0.31).unwrap();
        let b = expm_unitary(&jy, 1.17).unwrap();
        let ab = a.dot(&b);
        let direct = expm_unitary(&jy, 0.31 + 1.17).unwrap();
        assert!(crate::linalg::max_abs_diff(&ab, &direct) < 1e-11);
    }

    #[test]
    fn expm_pi_rotation_series_oracle() {
        // independent series summation for exp(-i pi J_y), spin 1
        let spin = Spin::new(2).unwrap();
        let jy = jy_matrix(spin);
        let mut series = CMat::eye(3);
        let mut term = CMat::eye(3);
        let factor = jy.mapv(|z| z * Complex64::new(0.0, -std::f64::consts::PI));
        for n in 1..80 {
            term = term.dot(&factor).mapv(|z| z / n as f64);
            series += &term;
        }
        let fast = expm_unitary(&jy, std::f64::consts::PI).unwrap();
        assert!(crate::linalg::max_abs_diff(&fast, &series) < 1e-12);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let bad = array![
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]
        ];
        assert!(matches!(expm_unitary(&bad, 1.0), Err(Error::Contract(_))));
    }

    #[test]
    fn goe_symmetric_and_deterministic() {
        let a = goe_sample(6, 42);
        let b = goe_sample(6, 42);
        let c = goe_sample(6, 43);
        assert_eq!(a, b);
        assert!(a.iter().zip(c.iter()).any(|(x, y)| x != y));
        for r in 0..6 {
            for c in 0..6 {
                assert_eq!(a[[r, c]], a[[c, r]]);
                assert_eq!(a[[r, c]].im, 0.0);
            }
        }
    }

    #[test]
    fn goe_diagonal_mean() {
        // Monte-Carlo check of the convention: diagonal entries are N(0, 1).
        let mut sum = 0.0;
        let mut count = 0usize;
        for seed in 0..2500u64 {
            let a = goe_sample(4, 1_000_000 + seed);
            for n in 0..4 {
                sum += a[[n, n]].re;
                count += 1;
            }
        }
        assert!((sum / count as f64).abs() < 0.05);
    }

    #[test]
    fn angle_validation() {
        assert!(CoherentAngles::new(-0.1, 0.0).is_err());
        assert!(CoherentAngles::new(3.2, 0.0).is_err());
        let wrapped = CoherentAngles::new(1.0, -1.0).unwrap();
        assert!(wrapped.phi > 5.2 && wrapped.phi < 5.3);
    }
}
