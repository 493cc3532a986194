//! The four chaos diagnostics: OTOC, Loschmidt echo, generalized
//! entanglement, and observational entropy.
//!
//! All of them are functions of the Floquet parameters and the
//! stroboscopic time m. The operator-based pair (OTOC, echo) is
//! state-independent; the state-based pair (GE, OE) starts from a spin
//! coherent state and evolves it without collapse.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::floquet::{self, FloquetParams};
use crate::linalg::{self, CMat, CVec};
use crate::spinops::{self, CoherentAngles, Spin};

/// Partition of the J_z eigenbasis into macrostate blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseGraining {
    dim: usize,
    blocks: Vec<Vec<usize>>,
}

impl CoarseGraining {
    /// Validates that the blocks are nonempty, disjoint, and cover 0..dim.
    pub fn new(dim: usize, blocks: Vec<Vec<usize>>) -> Result<CoarseGraining> {
        let mut seen = vec![false; dim];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::Contract("coarse graining has an empty block".into()));
            }
            for &n in block {
                if n >= dim {
                    return Err(Error::Contract(format!(
                        "coarse graining index {n} out of range for dimension {dim}"
                    )));
                }
                if seen[n] {
                    return Err(Error::Contract(format!("coarse graining repeats index {n}")));
                }
                seen[n] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::Contract("coarse graining does not cover the basis".into()));
        }
        Ok(CoarseGraining { dim, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn volumes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }
}

/// Consecutive blocks of `block_len` basis states; a shorter final block
/// holds the remainder when block_len does not divide d.
pub fn default_coarse_graining(spin: Spin, block_len: usize) -> Result<CoarseGraining> {
    let d = spin.dim();
    if block_len == 0 || block_len > d {
        return Err(Error::Domain(format!(
            "block length {block_len} outside 1..={d}"
        )));
    }
    let blocks = (0..d)
        .collect::<Vec<_>>()
        .chunks(block_len)
        .map(|c| c.to_vec())
        .collect();
    CoarseGraining::new(d, blocks)
}

/// Partition by the sign of m: {m > 0}, {m = 0}, {m < 0}.
/// Half-integer spins have no m = 0 block.
pub fn sign_coarse_graining(spin: Spin) -> CoarseGraining {
    let mut pos = Vec::new();
    let mut zero = Vec::new();
    let mut neg = Vec::new();
    for (n, m) in spin.m_values().into_iter().enumerate() {
        if m > 0.0 {
            pos.push(n);
        } else if m < 0.0 {
            neg.push(n);
        } else {
            zero.push(n);
        }
    }
    let blocks: Vec<Vec<usize>> = [pos, zero, neg].into_iter().filter(|b| !b.is_empty()).collect();
    CoarseGraining::new(spin.dim(), blocks).expect("sign partition always covers the basis")
}

/// Which diagnostic a series belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureId {
    Otoc,
    LoschmidtEcho,
    GeneralizedEntanglement,
    ObservationalEntropy,
}

impl MeasureId {
    pub fn label(&self) -> &'static str {
        match self {
            MeasureId::Otoc => "otoc",
            MeasureId::LoschmidtEcho => "loschmidt_echo",
            MeasureId::GeneralizedEntanglement => "generalized_entanglement",
            MeasureId::ObservationalEntropy => "observational_entropy",
        }
    }
}

/// Measure-specific inputs carried alongside a series for reproducibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesExtra {
    None,
    /// Echo perturbation k' - k.
    Dk(f64),
    /// Initial coherent-state direction for GE / OE.
    Angles(CoherentAngles),
    /// GOE seed of the OTOC operator W.
    WSeed(u64),
}

/// One diagnostic evaluated along an ordered axis (k grid or m grid).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSeries {
    pub measure_id: MeasureId,
    /// Parameters held fixed along the axis (k is ignored for k-sweeps).
    pub fixed_params: FloquetParams,
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
    pub extra: SeriesExtra,
}

impl MeasureSeries {
    pub fn new(
        measure_id: MeasureId,
        fixed_params: FloquetParams,
        axis_name: &str,
        axis: Vec<f64>,
        values: Vec<f64>,
        seed: u64,
        extra: SeriesExtra,
    ) -> Result<MeasureSeries> {
        if axis.len() != values.len() {
            return Err(Error::Contract(format!(
                "series axis length {} != values length {}",
                axis.len(),
                values.len()
            )));
        }
        if axis.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract("series axis must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("series contains a non-finite value".into()));
        }
        Ok(MeasureSeries {
            measure_id,
            fixed_params,
            axis_name: axis_name.to_string(),
            axis,
            values,
            seed,
            extra,
        })
    }
}

fn check_hermitian(w: &CMat, what: &str) -> Result<()> {
    let defect = linalg::hermiticity_defect(w);
    if defect > 1e-12 {
        return Err(Error::Contract(format!(
            "{what} must be Hermitian (defect {defect:.3e})"
        )));
    }
    Ok(())
}

fn check_normalized(state: &CVec, what: &str) -> Result<()> {
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Contract(format!("{what} must be normalized (norm {norm})")));
    }
    Ok(())
}

/// -(1/2d) Tr([W(m), W]^2) from a precomputed Heisenberg operator W(m).
fn otoc_from_heisenberg(w_m: &CMat, w: &CMat) -> Result<f64> {
    let d = w.nrows();
    let comm = w_m.dot(w) - w.dot(w_m);
    let sq = comm.dot(&comm);
    let trace: Complex64 = (0..d).map(|n| sq[[n, n]]).sum();
    if trace.im.abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "OTOC trace has imaginary residue {:.3e}",
            trace.im
        )));
    }
    Ok((-trace.re / (2.0 * d as f64)).max(0.0))
}

/// Infinite-temperature OTOC C(m; k) = -(1/2d) Tr([W(m), W]^2),
/// with W(m) = U^m W U^{-m}.
pub fn otoc(p: &FloquetParams, w: &CMat, m: usize) -> Result<f64> {
    let u = floquet::build_floquet(p)?;
    otoc_with(&u, w, m)
}

/// OTOC from a prebuilt Floquet operator (hot path for sweeps).
pub fn otoc_with(u: &CMat, w: &CMat, m: usize) -> Result<f64> {
    check_hermitian(w, "OTOC operator W")?;
    let um = floquet::floquet_power(u, m)?;
    let um_dag = um.t().mapv(|z| z.conj());
    let w_m = um.dot(w).dot(&um_dag);
    otoc_from_heisenberg(&w_m, w)
}

/// OTOC with W = J_z.
pub fn otoc_jz(p: &FloquetParams, m: usize) -> Result<f64> {
    otoc(p, &spinops::jz_matrix(p.spin), m)
}

/// C(m) for m = 0..=m_max, advancing W(m) one conjugation per step.
pub fn otoc_time_series(u: &CMat, w: &CMat, m_max: usize) -> Result<Vec<f64>> {
    check_hermitian(w, "OTOC operator W")?;
    let u_dag = u.t().mapv(|z| z.conj());
    let mut w_m = w.clone();
    let mut out = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        if m > 0 {
            w_m = u.dot(&w_m).dot(&u_dag);
        }
        out.push(otoc_from_heisenberg(&w_m, w)?);
    }
    Ok(out)
}

/// State-independent Loschmidt echo
/// F(m; k, k') = [d + |Tr(U^{-m}(k') U^m(k))|^2] / (d (d + 1)).
pub fn loschmidt_echo(p: &FloquetParams, k_prime: f64, m: usize) -> Result<f64> {
    let u = floquet::build_floquet(p)?;
    let u_prime = floquet::build_floquet(&p.with_k(k_prime))?;
    loschmidt_echo_with(&u, &u_prime, m)
}

/// Echo from prebuilt forward and perturbed operators.
///
/// The backward evolution is (U(k')^dagger)^m, never a matrix inverse,
/// so it stays exactly unitary.
pub fn loschmidt_echo_with(u: &CMat, u_prime: &CMat, m: usize) -> Result<f64> {
    let d = u.nrows() as f64;
    if u == u_prime {
        // unperturbed evolution retraces itself exactly
        return Ok(1.0);
    }
    let forward = floquet::floquet_power(u, m)?;
    let backward = floquet::floquet_power(&u_prime.t().mapv(|z| z.conj()), m)?;
    let echo_op = backward.dot(&forward);
    let trace: Complex64 = (0..u.nrows()).map(|n| echo_op[[n, n]]).sum();
    Ok((d + trace.norm_sqr()) / (d * (d + 1.0)))
}

/// F(m) for m = 0..=m_max, advancing the forward and backward powers
/// one multiplication per step.
pub fn loschmidt_time_series(u: &CMat, u_prime: &CMat, m_max: usize) -> Result<Vec<f64>> {
    if u == u_prime {
        return Ok(vec![1.0; m_max + 1]);
    }
    let d = u.nrows();
    let df = d as f64;
    let u_prime_dag = u_prime.t().mapv(|z| z.conj());
    let mut forward = CMat::eye(d);
    let mut backward = CMat::eye(d);
    let mut out = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        if m > 0 {
            forward = u.dot(&forward);
            backward = u_prime_dag.dot(&backward);
        }
        let echo_op = backward.dot(&forward);
        let trace: Complex64 = (0..d).map(|n| echo_op[[n, n]]).sum();
        out.push((df + trace.norm_sqr()) / (df * (df + 1.0)));
    }
    Ok(out)
}

/// Generalized entanglement with respect to the su(2) observables:
/// GE = 1 - (⟨J_x⟩^2 + ⟨J_y⟩^2 + ⟨J_z⟩^2) / j^2.
pub fn generalized_entanglement(state: &CVec, spin: Spin) -> Result<f64> {
    let obs = [spinops::jx_matrix(spin), spinops::jy_matrix(spin), spinops::jz_matrix(spin)];
    generalized_entanglement_with(state, spin, &obs)
}

/// GE against a caller-supplied observable triple (any rotation of the
/// standard one leaves the result unchanged).
pub fn generalized_entanglement_with(state: &CVec, spin: Spin, obs: &[CMat; 3]) -> Result<f64> {
    check_normalized(state, "GE state")?;
    let j = spin.j();
    let purity = obs
        .iter()
        .map(|a| spinops::expectation(state, a).powi(2))
        .sum::<f64>()
        / (j * j);
    let ge = 1.0 - purity;
    if ge < -1e-12 {
        return Err(Error::Numerical(format!("GE = {ge:.3e} below the clamp window")));
    }
    Ok(ge.max(0.0))
}

/// GE of an evolving coherent state at m = 0..=m_max.
pub fn ge_series(p: &FloquetParams, angles: CoherentAngles, m_max: usize) -> Result<MeasureSeries> {
    let u = floquet::build_floquet(p)?;
    let obs = [
        spinops::jx_matrix(p.spin),
        spinops::jy_matrix(p.spin),
        spinops::jz_matrix(p.spin),
    ];
    let mut state = spinops::coherent_state(p.spin, angles);
    let mut values = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        if m > 0 {
            state = u.dot(&state);
        }
        values.push(generalized_entanglement_with(&state, p.spin, &obs)?);
    }
    MeasureSeries::new(
        MeasureId::GeneralizedEntanglement,
        *p,
        "m",
        (0..=m_max).map(|m| m as f64).collect(),
        values,
        0,
        SeriesExtra::Angles(angles),
    )
}

/// Observational entropy S = -sum_i p_i ln(p_i / V_i) over macrostate
/// blocks, with p_i the total weight of the state in block i.
pub fn observational_entropy(state: &CVec, cg: &CoarseGraining) -> Result<f64> {
    check_normalized(state, "OE state")?;
    if state.len() != cg.dim() {
        return Err(Error::Contract(format!(
            "state dimension {} does not match coarse graining dimension {}",
            state.len(),
            cg.dim()
        )));
    }
    let mut s = 0.0;
    for block in cg.blocks() {
        let p: f64 = block.iter().map(|&n| state[n].norm_sqr()).sum();
        if p > 0.0 {
            s -= p * (p / block.len() as f64).ln();
        }
    }
    Ok(s)
}

/// OE of an evolving coherent state at m = 0..=m_max. The coarse-grained
/// measurement is virtual: probabilities are read off |psi(m)> without
/// collapsing it between steps.
pub fn oe_series(
    p: &FloquetParams,
    angles: CoherentAngles,
    cg: &CoarseGraining,
    m_max: usize,
) -> Result<MeasureSeries> {
    let u = floquet::build_floquet(p)?;
    let mut state = spinops::coherent_state(p.spin, angles);
    let mut values = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        if m > 0 {
            state = u.dot(&state);
        }
        values.push(observational_entropy(&state, cg)?);
    }
    MeasureSeries::new(
        MeasureId::ObservationalEntropy,
        *p,
        "m",
        (0..=m_max).map(|m| m as f64).collect(),
        values,
        0,
        SeriesExtra::Angles(angles),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn params(twice_j: u32, alpha: f64, k: f64) -> FloquetParams {
        FloquetParams::new(Spin::new(twice_j).unwrap(), alpha, k).unwrap()
    }

    #[test]
    fn otoc_trivial_cases() {
        let p = params(4, 0.7, 3.1);
        assert_eq!(otoc(&p, &spinops::jz_matrix(p.spin), 0).unwrap(), 0.0);
        let eye = CMat::eye(5);
        assert_abs_diff_eq!(otoc(&p, &eye, 7).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn otoc_alpha_pi_oracles() {
        // At alpha = pi, j = 1 the step operator is anti-diagonal, so it
        // maps J_z to -J_z and the J_z OTOC vanishes identically.
        let p = params(2, PI, PI);
        assert_abs_diff_eq!(otoc_jz(&p, 1).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(otoc_jz(&p, 5).unwrap(), 0.0, epsilon = 1e-12);

        // With W = J_x instead, one step gives C = (4/3) sin^2(k/2).
        for k in [1.3, 0.4, 2.9] {
            let p = params(2, PI, k);
            let w = spinops::jx_matrix(p.spin);
            assert_abs_diff_eq!(
                otoc(&p, &w, 1).unwrap(),
                (4.0 / 3.0) * (k / 2.0).sin().powi(2),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn otoc_rejects_non_hermitian() {
        let p = params(2, 0.3, 1.0);
        let (jp, _) = spinops::jpm_matrices(p.spin);
        assert!(matches!(otoc(&p, &jp, 2), Err(Error::Contract(_))));
    }

    #[test]
    fn otoc_series_matches_single_calls() {
        let p = params(3, 0.9, 2.2);
        let w = spinops::goe_sample(p.spin.dim(), 7);
        let u = floquet::build_floquet(&p).unwrap();
        let series = otoc_time_series(&u, &w, 6).unwrap();
        for (m, &v) in series.iter().enumerate() {
            assert_abs_diff_eq!(v, otoc(&p, &w, m).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn echo_trivial_cases() {
        let p = params(4, 1.1, 2.6);
        assert_eq!(loschmidt_echo(&p, 2.6, 17).unwrap(), 1.0);
        assert_eq!(loschmidt_echo(&p, 9.9, 0).unwrap(), 1.0);
    }

    #[test]
    fn echo_bounds() {
        let d = 5.0;
        for m in [1usize, 5, 25] {
            for dk in [0.01, 0.4, 2.0] {
                let p = params(4, PI / 4.0, 1.7);
                let f = loschmidt_echo(&p, 1.7 + dk, m).unwrap();
                assert!(f >= 1.0 / (d + 1.0) - 1e-12 && f <= 1.0 + 1e-12, "F = {f}");
            }
        }
    }

    #[test]
    fn echo_time_series_matches_single_calls() {
        let p = params(3, 0.8, 1.9);
        let u = floquet::build_floquet(&p).unwrap();
        let u_prime = floquet::build_floquet(&p.with_k(2.3)).unwrap();
        let series = loschmidt_time_series(&u, &u_prime, 8).unwrap();
        for (m, &f) in series.iter().enumerate() {
            assert_abs_diff_eq!(f, loschmidt_echo(&p, 2.3, m).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn ge_trivial_cases() {
        let spin = Spin::new(4).unwrap();
        for (theta, phi) in [(0.0, 0.0), (PI / 4.0, PI / 4.0), (2.0, 5.0)] {
            let st = spinops::coherent_state(spin, CoherentAngles::new(theta, phi).unwrap());
            assert!(generalized_entanglement(&st, spin).unwrap() <= 1e-10);
        }

        // |j, 0> for integer j has all three expectations zero
        let mut st = CVec::zeros(5);
        st[2] = Complex64::new(1.0, 0.0);
        assert_abs_diff_eq!(generalized_entanglement(&st, spin).unwrap(), 1.0, epsilon = 1e-14);

        let half = Spin::new(1).unwrap();
        let mut plus = CVec::zeros(2);
        plus[0] = Complex64::new((0.5f64).sqrt(), 0.0);
        plus[1] = Complex64::new((0.5f64).sqrt(), 0.0);
        assert!(generalized_entanglement(&plus, half).unwrap() <= 1e-12);
    }

    #[test]
    fn ge_rejects_unnormalized() {
        let spin = Spin::new(2).unwrap();
        let mut st = CVec::zeros(3);
        st[0] = Complex64::new(2.0, 0.0);
        assert!(matches!(generalized_entanglement(&st, spin), Err(Error::Contract(_))));
    }

    #[test]
    fn ge_invariant_under_rotated_triple() {
        let spin = Spin::new(3).unwrap();
        let p = params(3, 0.8, 4.4);
        let u = floquet::build_floquet(&p).unwrap();
        let mut st = spinops::coherent_state(spin, CoherentAngles::new(0.9, 2.0).unwrap());
        for _ in 0..7 {
            st = u.dot(&st);
        }
        let standard = generalized_entanglement(&st, spin).unwrap();

        // conjugate the triple by a rotation about J_y
        let r = spinops::expm_unitary(&spinops::jy_matrix(spin), 0.6).unwrap();
        let r_dag = r.t().mapv(|z| z.conj());
        let rot = |a: &CMat| r.dot(a).dot(&r_dag);
        let obs = [
            rot(&spinops::jx_matrix(spin)),
            rot(&spinops::jy_matrix(spin)),
            rot(&spinops::jz_matrix(spin)),
        ];
        let alternative = generalized_entanglement_with(&st, spin, &obs).unwrap();
        assert_abs_diff_eq!(standard, alternative, epsilon = 1e-12);
    }

    #[test]
    fn ge_series_rotation_only_stays_zero() {
        let p = params(2, PI / 2.0, 0.0);
        let series = ge_series(&p, CoherentAngles::new(1.0, 0.5).unwrap(), 30).unwrap();
        assert!(series.values.iter().all(|&v| v <= 1e-10));
    }

    #[test]
    fn coarse_graining_shapes() {
        let spin5 = Spin::new(4).unwrap(); // d = 5
        let cg = default_coarse_graining(spin5, 2).unwrap();
        assert_eq!(cg.blocks(), &[vec![0, 1], vec![2, 3], vec![4]]);

        let spin4 = Spin::new(3).unwrap(); // d = 4
        assert_eq!(default_coarse_graining(spin4, 4).unwrap().blocks().len(), 1);
        assert_eq!(default_coarse_graining(spin4, 1).unwrap().blocks().len(), 4);
        assert!(default_coarse_graining(spin4, 0).is_err());
        assert!(default_coarse_graining(spin4, 5).is_err());

        let signs = sign_coarse_graining(spin5);
        assert_eq!(signs.blocks(), &[vec![0, 1], vec![2], vec![3, 4]]);
        let signs_half = sign_coarse_graining(Spin::new(3).unwrap());
        assert_eq!(signs_half.blocks(), &[vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn coarse_graining_rejects_bad_partitions() {
        assert!(CoarseGraining::new(3, vec![vec![0, 1]]).is_err());
        assert!(CoarseGraining::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(CoarseGraining::new(3, vec![vec![0, 1, 2], vec![]]).is_err());
        assert!(CoarseGraining::new(3, vec![vec![0, 1, 3]]).is_err());
        assert!(CoarseGraining::new(3, vec![vec![0], vec![1], vec![2]]).is_ok());
    }

    #[test]
    fn oe_anchor_values() {
        let spin = Spin::new(3).unwrap(); // d = 4
        let d = spin.dim();

        let single = default_coarse_graining(spin, d).unwrap();
        let st = spinops::coherent_state(spin, CoherentAngles::new(1.2, 0.7).unwrap());
        assert_abs_diff_eq!(observational_entropy(&st, &single).unwrap(), (d as f64).ln(), epsilon = 1e-12);

        let singletons = default_coarse_graining(spin, 1).unwrap();
        let mut basis = CVec::zeros(d);
        basis[0] = Complex64::new(1.0, 0.0);
        assert_eq!(observational_entropy(&basis, &singletons).unwrap(), 0.0);

        let pairs = default_coarse_graining(spin, 2).unwrap();
        let uniform = CVec::from_elem(d, Complex64::new(0.5, 0.0));
        assert_abs_diff_eq!(observational_entropy(&uniform, &pairs).unwrap(), 4f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn oe_bounds_along_series() {
        let p = params(4, PI / 4.0, 2.9);
        let cg = default_coarse_graining(p.spin, 2).unwrap();
        let series = oe_series(&p, CoherentAngles::new(PI / 4.0, PI / 4.0).unwrap(), &cg, 40).unwrap();
        let ln_d = (p.spin.dim() as f64).ln();
        assert!(series
            .values
            .iter()
            .all(|&v| (-1e-12..=ln_d + 1e-12).contains(&v)));
    }

    #[test]
    fn measures_repeat_after_kappa_spot_check() {
        // one spot check per measure; the full grid lives in the acceptance suite
        let spin = Spin::new(4).unwrap();
        let kappa = floquet::kappa_period(spin);
        let p = params(4, PI / 4.0, 1.7);
        let p_shift = p.with_k(1.7 + kappa);
        let m = 9;

        let w = spinops::goe_sample(spin.dim(), 11);
        assert_abs_diff_eq!(otoc(&p, &w, m).unwrap(), otoc(&p_shift, &w, m).unwrap(), epsilon = 1e-10);

        let f_a = loschmidt_echo(&p, 1.7 + 0.1, m).unwrap();
        let f_b = loschmidt_echo(&p_shift, 1.7 + kappa + 0.1, m).unwrap();
        assert_abs_diff_eq!(f_a, f_b, epsilon = 1e-10);

        let angles = CoherentAngles::new(PI / 4.0, PI / 4.0).unwrap();
        let ge_a = ge_series(&p, angles, m).unwrap();
        let ge_b = ge_series(&p_shift, angles, m).unwrap();
        for (x, y) in ge_a.values.iter().zip(ge_b.values.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }

        let cg = default_coarse_graining(spin, 2).unwrap();
        let oe_a = oe_series(&p, angles, &cg, m).unwrap();
        let oe_b = oe_series(&p_shift, angles, &cg, m).unwrap();
        for (x, y) in oe_a.values.iter().zip(oe_b.values.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn series_validation() {
        let p = params(2, 0.1, 0.2);
        let bad_axis = MeasureSeries::new(
            MeasureId::Otoc,
            p,
            "m",
            vec![0.0, 0.0, 1.0],
            vec![0.0; 3],
            0,
            SeriesExtra::None,
        );
        assert!(bad_axis.is_err());
        let bad_len = MeasureSeries::new(
            MeasureId::Otoc,
            p,
            "m",
            vec![0.0, 1.0],
            vec![0.0; 3],
            0,
            SeriesExtra::None,
        );
        assert!(bad_len.is_err());
    }
}
