//! Parameter-scan engine: k-sweeps of any measure, exact period
//! detection, minimal-period search, the echo reflection symmetry, and
//! the k = N pi / 2 special-point time scan.
//!
//! Period checks never interpolate: the grid step must divide the
//! candidate period so that shifted samples land on grid points, and a
//! misaligned request is an error rather than an approximation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::floquet::{self, FloquetParams};
use crate::measures::{self, CoarseGraining, MeasureId, MeasureSeries, SeriesExtra};
use crate::spinops::{self, CoherentAngles, Spin};

/// Half-open kick-strength grid [start, stop) with uniform step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl KGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<KGrid> {
        if !start.is_finite() || !stop.is_finite() || !step.is_finite() {
            return Err(Error::Domain("grid bounds must be finite".into()));
        }
        if step <= 0.0 {
            return Err(Error::Domain(format!("grid step {step} must be positive")));
        }
        if stop <= start {
            return Err(Error::Domain(format!("grid stop {stop} must exceed start {start}")));
        }
        Ok(KGrid { start, stop, step })
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step - 1e-9).ceil().max(1.0) as usize;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Everything needed to evaluate one measure along a k grid.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub measure_id: MeasureId,
    pub spin: Spin,
    pub alpha: f64,
    /// Stroboscopic time at which the measure is evaluated.
    pub m: usize,
    pub grid: KGrid,
    pub seed: u64,
    /// Echo perturbation (Loschmidt echo only).
    pub dk: Option<f64>,
    /// Initial coherent state (GE and OE only).
    pub angles: Option<CoherentAngles>,
    /// Macrostate partition (OE only).
    pub coarse: Option<CoarseGraining>,
    /// GOE seed for the operator W (OTOC only).
    pub w_seed: Option<u64>,
}

impl SweepSpec {
    pub fn otoc(spin: Spin, alpha: f64, m: usize, grid: KGrid, w_seed: u64) -> SweepSpec {
        SweepSpec {
            measure_id: MeasureId::Otoc,
            spin,
            alpha,
            m,
            grid,
            seed: 0,
            dk: None,
            angles: None,
            coarse: None,
            w_seed: Some(w_seed),
        }
    }

    pub fn loschmidt(spin: Spin, alpha: f64, m: usize, grid: KGrid, dk: f64) -> SweepSpec {
        SweepSpec {
            measure_id: MeasureId::LoschmidtEcho,
            spin,
            alpha,
            m,
            grid,
            seed: 0,
            dk: Some(dk),
            angles: None,
            coarse: None,
            w_seed: None,
        }
    }

    pub fn ge(spin: Spin, alpha: f64, m: usize, grid: KGrid, angles: CoherentAngles) -> SweepSpec {
        SweepSpec {
            measure_id: MeasureId::GeneralizedEntanglement,
            spin,
            alpha,
            m,
            grid,
            seed: 0,
            dk: None,
            angles: Some(angles),
            coarse: None,
            w_seed: None,
        }
    }

    pub fn oe(
        spin: Spin,
        alpha: f64,
        m: usize,
        grid: KGrid,
        angles: CoherentAngles,
        coarse: CoarseGraining,
    ) -> SweepSpec {
        SweepSpec {
            measure_id: MeasureId::ObservationalEntropy,
            spin,
            alpha,
            m,
            grid,
            seed: 0,
            dk: None,
            angles: Some(angles),
            coarse: Some(coarse),
            w_seed: None,
        }
    }

    /// Rejects extras that do not belong to the chosen measure and
    /// missing ones that do.
    pub fn validate(&self) -> Result<()> {
        let want = |cond: bool, what: &str| {
            if cond {
                Ok(())
            } else {
                Err(Error::Spec(format!(
                    "{} sweep: {what}",
                    self.measure_id.label()
                )))
            }
        };
        match self.measure_id {
            MeasureId::Otoc => {
                want(self.w_seed.is_some(), "needs an operator seed (w_seed)")?;
                want(self.dk.is_none(), "does not take dk")?;
                want(self.angles.is_none(), "does not take coherent angles")?;
                want(self.coarse.is_none(), "does not take a coarse graining")?;
            }
            MeasureId::LoschmidtEcho => {
                want(self.dk.is_some(), "needs the perturbation dk")?;
                want(self.w_seed.is_none(), "does not take w_seed")?;
                want(self.angles.is_none(), "does not take coherent angles")?;
                want(self.coarse.is_none(), "does not take a coarse graining")?;
            }
            MeasureId::GeneralizedEntanglement => {
                want(self.angles.is_some(), "needs coherent angles")?;
                want(self.dk.is_none(), "does not take dk")?;
                want(self.w_seed.is_none(), "does not take w_seed")?;
                want(self.coarse.is_none(), "does not take a coarse graining")?;
            }
            MeasureId::ObservationalEntropy => {
                want(self.angles.is_some(), "needs coherent angles")?;
                want(self.coarse.is_some(), "needs a coarse graining")?;
                want(self.dk.is_none(), "does not take dk")?;
                want(self.w_seed.is_none(), "does not take w_seed")?;
            }
        }
        if let Some(cg) = &self.coarse {
            if cg.dim() != self.spin.dim() {
                return Err(Error::Spec(format!(
                    "coarse graining dimension {} does not match spin dimension {}",
                    cg.dim(),
                    self.spin.dim()
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of one periodicity (or reflection) comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodReport {
    pub candidate_kappa: f64,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub minimal_period: Option<f64>,
}

impl PeriodReport {
    fn new(candidate_kappa: f64, max_abs_deviation: f64, tolerance: f64) -> PeriodReport {
        PeriodReport {
            candidate_kappa,
            max_abs_deviation,
            tolerance,
            pass: max_abs_deviation <= tolerance,
            minimal_period: None,
        }
    }
}

/// Evaluates the spec's measure at every grid point, in parallel.
///
/// The result is deterministic and independent of the parallelism: any
/// randomness (the OTOC operator) is drawn once per sweep from its own
/// seed, point evaluations are pure, and values are assembled in axis
/// order.
pub fn run_sweep(spec: &SweepSpec) -> Result<MeasureSeries> {
    spec.validate()?;
    let axis = spec.grid.points();
    let base = FloquetParams::new(spec.spin, spec.alpha, 0.0)?;

    let w = spec
        .w_seed
        .map(|seed| spinops::goe_sample(spec.spin.dim(), seed));
    let state0 = spec.angles.map(|a| spinops::coherent_state(spec.spin, a));

    let values: Result<Vec<f64>> = axis
        .par_iter()
        .map(|&k| {
            let u = floquet::build_floquet(&base.with_k(k))?;
            match spec.measure_id {
                MeasureId::Otoc => measures::otoc_with(&u, w.as_ref().unwrap(), spec.m),
                MeasureId::LoschmidtEcho => {
                    let dk = spec.dk.unwrap();
                    let u_prime = floquet::build_floquet(&base.with_k(k + dk))?;
                    measures::loschmidt_echo_with(&u, &u_prime, spec.m)
                }
                MeasureId::GeneralizedEntanglement => {
                    let mut state = state0.clone().unwrap();
                    for _ in 0..spec.m {
                        state = u.dot(&state);
                    }
                    measures::generalized_entanglement(&state, spec.spin)
                }
                MeasureId::ObservationalEntropy => {
                    let mut state = state0.clone().unwrap();
                    for _ in 0..spec.m {
                        state = u.dot(&state);
                    }
                    measures::observational_entropy(&state, spec.coarse.as_ref().unwrap())
                }
            }
        })
        .collect();

    let extra = match spec.measure_id {
        MeasureId::Otoc => SeriesExtra::WSeed(spec.w_seed.unwrap()),
        MeasureId::LoschmidtEcho => SeriesExtra::Dk(spec.dk.unwrap()),
        MeasureId::GeneralizedEntanglement | MeasureId::ObservationalEntropy => {
            SeriesExtra::Angles(spec.angles.unwrap())
        }
    };
    MeasureSeries::new(spec.measure_id, base, "k", axis, values?, spec.seed, extra)
}

/// Uniform step of a series axis, or an alignment error.
fn uniform_step(axis: &[f64]) -> Result<f64> {
    if axis.len() < 2 {
        return Err(Error::Alignment("series has fewer than two grid points".into()));
    }
    let step = axis[1] - axis[0];
    for w in axis.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 {
            return Err(Error::Alignment("series grid is not uniform".into()));
        }
    }
    Ok(step)
}

/// Compares value(k) against value(k + kappa) over every aligned pair.
///
/// The step must divide kappa to within 1e-9 and the grid must span at
/// least 2 kappa; interpolation is never used.
pub fn check_period(series: &MeasureSeries, kappa: f64, tol: f64) -> Result<PeriodReport> {
    if kappa <= 0.0 || !kappa.is_finite() {
        return Err(Error::Domain(format!("candidate period {kappa} must be positive")));
    }
    let step = uniform_step(&series.axis)?;
    let shift = (kappa / step).round();
    if (kappa - shift * step).abs() > 1e-9 || shift < 1.0 {
        return Err(Error::Alignment(format!(
            "grid step {step} does not divide candidate period {kappa}"
        )));
    }
    let shift = shift as usize;
    let n = series.values.len();
    if n < 2 * shift {
        return Err(Error::Alignment(format!(
            "grid spans less than twice the candidate period (need {} points, have {n})",
            2 * shift
        )));
    }
    let max_dev = (0..n - shift)
        .map(|i| (series.values[i] - series.values[i + shift]).abs())
        .fold(0.0, f64::max);
    Ok(PeriodReport::new(kappa, max_dev, tol))
}

/// Smallest passing candidate among {kappa_j / n : n in divisors},
/// falling back to kappa_j, which must itself pass.
pub fn minimal_period(
    series: &MeasureSeries,
    kappa_j: f64,
    divisors: &[u32],
    tol: f64,
) -> Result<f64> {
    let full = check_period(series, kappa_j, tol)?;
    if !full.pass {
        return Err(Error::Contract(format!(
            "kappa_j = {kappa_j} failed its own periodicity check (deviation {:.3e}); \
             this indicates an implementation bug",
            full.max_abs_deviation
        )));
    }
    let mut best = kappa_j;
    for &n in divisors {
        if n < 2 {
            continue;
        }
        let candidate = kappa_j / n as f64;
        let report = check_period(series, candidate, tol)?;
        if report.pass && candidate < best {
            best = candidate;
        }
    }
    Ok(best)
}

/// Default divisor candidates for the minimal-period search.
pub const MINIMAL_PERIOD_DIVISORS: [u32; 4] = [2, 3, 4, 6];

/// Verifies the echo reflection symmetry
/// F(m; k, k + dk) = F(m; kappa_ref - k, kappa_ref - k - dk),
/// with kappa_ref = 4 pi j (integer j) or 2 pi j (half-integer j).
///
/// Using F(a, b) = F(b, a), the partner of grid point k is the grid
/// point at kappa_ref - dk - k, which must align exactly.
pub fn reflection_check(series: &MeasureSeries, spin: Spin, tol: f64) -> Result<PeriodReport> {
    let dk = match series.extra {
        SeriesExtra::Dk(dk) => dk,
        _ => {
            return Err(Error::Spec(
                "reflection check needs a Loschmidt echo series with a recorded dk".into(),
            ))
        }
    };
    if series.measure_id != MeasureId::LoschmidtEcho {
        return Err(Error::Spec("reflection symmetry is defined for the Loschmidt echo".into()));
    }
    let kappa_ref = floquet::kappa_period(spin);
    let step = uniform_step(&series.axis)?;
    let offset = (kappa_ref - dk - 2.0 * series.axis[0]) / step;
    if (offset - offset.round()).abs() * step > 1e-9 {
        return Err(Error::Alignment(format!(
            "reflection partner of the grid start is off-grid (fractional index {offset})"
        )));
    }
    let offset = offset.round() as i64;
    let n = series.values.len() as i64;
    let mut max_dev = 0.0f64;
    let mut pairs = 0usize;
    for i in 0..n {
        let partner = offset - i;
        if (0..n).contains(&partner) {
            let dev = (series.values[i as usize] - series.values[partner as usize]).abs();
            max_dev = max_dev.max(dev);
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::Alignment(
            "no grid point has its reflection partner on the grid".into(),
        ));
    }
    Ok(PeriodReport::new(kappa_ref, max_dev, tol))
}

/// Pearson correlation between x[..n-lag] and x[lag..].
pub fn autocorrelation(values: &[f64], lag: usize) -> f64 {
    let n = values.len();
    if lag == 0 || lag >= n - 1 {
        return 0.0;
    }
    let a = &values[..n - lag];
    let b = &values[lag..];
    let len = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / len;
    let mean_b = b.iter().sum::<f64>() / len;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a).powi(2);
        var_b += (y - mean_b).powi(2);
    }
    if var_a <= 1e-30 || var_b <= 1e-30 {
        return 0.0;
    }
    cov / (var_a * var_b).sqrt()
}

/// Best autocorrelation over lags 1..=max_lag: (lag, correlation).
pub fn best_autocorrelation(values: &[f64], max_lag: usize) -> (usize, f64) {
    let mut best = (0usize, f64::NEG_INFINITY);
    for lag in 1..=max_lag {
        let r = autocorrelation(values, lag);
        if r > best.1 {
            best = (lag, r);
        }
    }
    best
}

/// Time series of OTOC, GE, and OE at the special kick strength
/// k = N pi / 2 + offset with N = 2j (so k = pi j + offset).
///
/// GE and OE start from the coherent state theta = phi = pi/4; OE uses
/// blocks of length 2. The echo is excluded: it decays at the special
/// point rather than turning periodic.
pub fn special_k_scan(
    spin: Spin,
    alpha: f64,
    m_max: usize,
    offset: f64,
    w_seed: u64,
) -> Result<(MeasureSeries, MeasureSeries, MeasureSeries)> {
    let k = spin.j() * std::f64::consts::PI + offset;
    let p = FloquetParams::new(spin, alpha, k)?;
    let u = floquet::build_floquet(&p)?;
    let axis: Vec<f64> = (0..=m_max).map(|m| m as f64).collect();

    let w = spinops::goe_sample(spin.dim(), w_seed);
    let otoc_values = measures::otoc_time_series(&u, &w, m_max)?;
    let otoc_series = MeasureSeries::new(
        MeasureId::Otoc,
        p,
        "m",
        axis,
        otoc_values,
        0,
        SeriesExtra::WSeed(w_seed),
    )?;

    let angles = CoherentAngles::new(std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_4)?;
    let ge = measures::ge_series(&p, angles, m_max)?;
    let cg = measures::default_coarse_graining(spin, 2)?;
    let oe = measures::oe_series(&p, angles, &cg, m_max)?;
    Ok((otoc_series, ge, oe))
}
