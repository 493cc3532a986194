//! Python bindings: the measure evaluations, sweeps, period checks,
//! spectra, and the classical map, with spins passed as "N"/"N/2"
//! strings and angles as either floats or literals like "pi/4".

// the #[pyfunction] expansion trips this lint on every binding
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use kicked_top::cli::parse_angle;
use kicked_top::error::Error;
use kicked_top::floquet::{self, FloquetParams};
use kicked_top::measures::{self, MeasureId, MeasureSeries, SeriesExtra};
use kicked_top::spinops::{self, CoherentAngles, Spin};
use kicked_top::sweep::{self, KGrid, SweepSpec};
use kicked_top::{classical, CMat};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Alignment(_) | Error::Spec(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Contract(_) | Error::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
    }
}

trait IntoPyResult<T> {
    fn into_py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for Result<T, Error> {
    fn into_py(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

/// Angle arguments accept either a float or a literal like "pi/4".
#[derive(FromPyObject)]
enum Angle {
    #[pyo3(transparent, annotation = "float")]
    Value(f64),
    #[pyo3(transparent, annotation = "str")]
    Literal(String),
}

impl Angle {
    fn resolve(&self) -> PyResult<f64> {
        match self {
            Angle::Value(v) => Ok(*v),
            Angle::Literal(s) => parse_angle(s).into_py(),
        }
    }
}

fn spin_of(j: &str) -> PyResult<Spin> {
    j.parse::<Spin>().into_py()
}

fn params(j: &str, alpha: &Angle, k: &Angle) -> PyResult<FloquetParams> {
    FloquetParams::new(spin_of(j)?, alpha.resolve()?, k.resolve()?).into_py()
}

fn floquet_of(p: &FloquetParams) -> PyResult<CMat> {
    floquet::build_floquet(p).into_py()
}

fn measure_of(name: &str) -> PyResult<MeasureId> {
    match name {
        "otoc" => Ok(MeasureId::Otoc),
        "echo" => Ok(MeasureId::LoschmidtEcho),
        "ge" => Ok(MeasureId::GeneralizedEntanglement),
        "oe" => Ok(MeasureId::ObservationalEntropy),
        other => Err(PyValueError::new_err(format!(
            "unknown measure '{other}': expected otoc, echo, ge, or oe"
        ))),
    }
}

fn series_out(series: MeasureSeries) -> (Vec<f64>, Vec<f64>) {
    (series.axis, series.values)
}

/// Kick-strength period kappa_j of the spin passed as "N" or "N/2".
#[pyfunction]
fn kappa_period(j: &str) -> PyResult<f64> {
    Ok(floquet::kappa_period(spin_of(j)?))
}

/// Parse an angle literal such as "pi", "3*pi/2", or "0.7".
#[pyfunction]
#[pyo3(name = "parse_angle")]
fn parse_angle_py(text: &str) -> PyResult<f64> {
    parse_angle(text).into_py()
}

/// Quasienergy phases of U(j, alpha, k), ascending; folded into
/// (-pi/2, pi/2] when fold_pi is true.
#[pyfunction]
#[pyo3(signature = (j, alpha, k, fold_pi = false))]
fn quasienergies(j: &str, alpha: Angle, k: Angle, fold_pi: bool) -> PyResult<Vec<f64>> {
    let u = floquet_of(&params(j, &alpha, &k)?)?;
    let spectrum = floquet::quasienergies(&u).into_py()?;
    Ok(if fold_pi {
        spectrum.folded_mod_pi()
    } else {
        spectrum.phases
    })
}

/// OTOC of a seeded GOE operator after m kicks.
#[pyfunction]
#[pyo3(signature = (j, alpha, k, m, w_seed = 0))]
fn otoc(j: &str, alpha: Angle, k: Angle, m: usize, w_seed: u64) -> PyResult<f64> {
    let p = params(j, &alpha, &k)?;
    let w = spinops::goe_sample(p.spin.dim(), w_seed);
    measures::otoc(&p, &w, m).into_py()
}

/// Loschmidt echo after m kicks with perturbed kick strength k + dk.
#[pyfunction]
fn loschmidt_echo(j: &str, alpha: Angle, k: Angle, dk: f64, m: usize) -> PyResult<f64> {
    let p = params(j, &alpha, &k)?;
    measures::loschmidt_echo(&p, p.k + dk, m).into_py()
}

/// Generalized entanglement of an evolved spin-coherent state.
#[pyfunction]
#[pyo3(signature = (j, alpha, k, m, theta, phi))]
fn generalized_entanglement(
    j: &str,
    alpha: Angle,
    k: Angle,
    m: usize,
    theta: Angle,
    phi: Angle,
) -> PyResult<f64> {
    let p = params(j, &alpha, &k)?;
    let angles = CoherentAngles::new(theta.resolve()?, phi.resolve()?).into_py()?;
    let u = floquet_of(&p)?;
    let state0 = spinops::coherent_state(p.spin, angles);
    let state = floquet::floquet_power(&u, m).into_py()?.dot(&state0);
    measures::generalized_entanglement(&state, p.spin).into_py()
}

/// Observational entropy of an evolved spin-coherent state under the
/// contiguous coarse graining with the given block length.
#[pyfunction]
#[pyo3(signature = (j, alpha, k, m, theta, phi, coarse_len = 2))]
fn observational_entropy(
    j: &str,
    alpha: Angle,
    k: Angle,
    m: usize,
    theta: Angle,
    phi: Angle,
    coarse_len: usize,
) -> PyResult<f64> {
    let p = params(j, &alpha, &k)?;
    let angles = CoherentAngles::new(theta.resolve()?, phi.resolve()?).into_py()?;
    let cg = measures::default_coarse_graining(p.spin, coarse_len).into_py()?;
    let u = floquet_of(&p)?;
    let state0 = spinops::coherent_state(p.spin, angles);
    let state = floquet::floquet_power(&u, m).into_py()?.dot(&state0);
    measures::observational_entropy(&state, &cg).into_py()
}

/// Sweep a measure over k at fixed m. Returns (k_values, measure_values).
#[pyfunction]
#[pyo3(signature = (
    measure, j, alpha, m, k_start, k_stop, k_step,
    dk = None, theta = None, phi = None, coarse_len = None, w_seed = None, seed = 0
))]
#[allow(clippy::too_many_arguments)]
fn sweep_k(
    measure: &str,
    j: &str,
    alpha: Angle,
    m: usize,
    k_start: Angle,
    k_stop: Angle,
    k_step: Angle,
    dk: Option<f64>,
    theta: Option<Angle>,
    phi: Option<Angle>,
    coarse_len: Option<usize>,
    w_seed: Option<u64>,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let measure_id = measure_of(measure)?;
    let s = spin_of(j)?;
    let alpha = alpha.resolve()?;
    let grid = KGrid::new(k_start.resolve()?, k_stop.resolve()?, k_step.resolve()?).into_py()?;
    let angles = match (theta, phi) {
        (None, None) => CoherentAngles::new(std::f64::consts::PI / 4.0, std::f64::consts::PI / 4.0),
        (t, p) => {
            let theta = match t {
                Some(a) => a.resolve()?,
                None => std::f64::consts::PI / 4.0,
            };
            let phi = match p {
                Some(a) => a.resolve()?,
                None => std::f64::consts::PI / 4.0,
            };
            CoherentAngles::new(theta, phi)
        }
    }
    .into_py()?;

    let mut spec = match measure_id {
        MeasureId::Otoc => SweepSpec::otoc(s, alpha, m, grid, w_seed.unwrap_or(0)),
        MeasureId::LoschmidtEcho => {
            let dk = dk.ok_or_else(|| PyValueError::new_err("echo sweep needs dk"))?;
            SweepSpec::loschmidt(s, alpha, m, grid, dk)
        }
        MeasureId::GeneralizedEntanglement => SweepSpec::ge(s, alpha, m, grid, angles),
        MeasureId::ObservationalEntropy => {
            let cg = measures::default_coarse_graining(s, coarse_len.unwrap_or(2)).into_py()?;
            SweepSpec::oe(s, alpha, m, grid, angles, cg)
        }
    };
    spec.seed = seed;
    Ok(series_out(sweep::run_sweep(&spec).into_py()?))
}

/// Time series of a measure at fixed k for m = 0..=m_max.
#[pyfunction]
#[pyo3(signature = (
    measure, j, alpha, k, m_max,
    dk = None, theta = None, phi = None, coarse_len = None, w_seed = None
))]
#[allow(clippy::too_many_arguments)]
fn time_series(
    measure: &str,
    j: &str,
    alpha: Angle,
    k: Angle,
    m_max: usize,
    dk: Option<f64>,
    theta: Option<Angle>,
    phi: Option<Angle>,
    coarse_len: Option<usize>,
    w_seed: Option<u64>,
) -> PyResult<Vec<f64>> {
    let p = params(j, &alpha, &k)?;
    let quarter = std::f64::consts::PI / 4.0;
    let angles = CoherentAngles::new(
        match theta {
            Some(a) => a.resolve()?,
            None => quarter,
        },
        match phi {
            Some(a) => a.resolve()?,
            None => quarter,
        },
    )
    .into_py()?;
    match measure_of(measure)? {
        MeasureId::Otoc => {
            let u = floquet_of(&p)?;
            let w = spinops::goe_sample(p.spin.dim(), w_seed.unwrap_or(0));
            measures::otoc_time_series(&u, &w, m_max).into_py()
        }
        MeasureId::LoschmidtEcho => {
            let dk = dk.ok_or_else(|| PyValueError::new_err("echo series needs dk"))?;
            let u = floquet_of(&p)?;
            let u_prime = floquet_of(&p.with_k(p.k + dk))?;
            measures::loschmidt_time_series(&u, &u_prime, m_max).into_py()
        }
        MeasureId::GeneralizedEntanglement => Ok(measures::ge_series(&p, angles, m_max)
            .into_py()?
            .values),
        MeasureId::ObservationalEntropy => {
            let cg = measures::default_coarse_graining(p.spin, coarse_len.unwrap_or(2)).into_py()?;
            Ok(measures::oe_series(&p, angles, &cg, m_max).into_py()?.values)
        }
    }
}

/// Check whether a sampled series repeats after kappa. The axis must be
/// uniform with a step dividing kappa. Returns
/// (pass, max_abs_deviation).
#[pyfunction]
#[pyo3(signature = (axis, values, kappa, tol = 1e-9))]
fn check_period(axis: Vec<f64>, values: Vec<f64>, kappa: f64, tol: f64) -> PyResult<(bool, f64)> {
    let series = MeasureSeries::new(
        MeasureId::Otoc,
        FloquetParams::new(Spin::new(1).into_py()?, 1.0, 0.0).into_py()?,
        "k",
        axis,
        values,
        0,
        SeriesExtra::None,
    )
    .into_py()?;
    let report = sweep::check_period(&series, kappa, tol).into_py()?;
    Ok((report.pass, report.max_abs_deviation))
}

/// Iterate the classical kicked-top map. Returns n (x, y, z) rows.
#[pyfunction]
fn classical_trajectory(
    theta: Angle,
    phi: Angle,
    k: Angle,
    alpha: Angle,
    n: usize,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let p0 = classical::SpherePoint::from_angles(theta.resolve()?, phi.resolve()?);
    let points = classical::trajectory(p0, k.resolve()?, alpha.resolve()?, n).into_py()?;
    Ok(points.into_iter().map(|p| (p.x, p.y, p.z)).collect())
}

/// Stroboscopic phase portrait from seeded random initial points.
/// Returns (theta, phi) rows, n_init * n_iter of them.
#[pyfunction]
#[pyo3(signature = (k, alpha, n_init, n_iter, seed = 0))]
fn phase_portrait(
    k: Angle,
    alpha: Angle,
    n_init: usize,
    n_iter: usize,
    seed: u64,
) -> PyResult<Vec<(f64, f64)>> {
    let points =
        classical::phase_portrait(k.resolve()?, alpha.resolve()?, n_init, n_iter, seed).into_py()?;
    Ok(points.into_iter().map(|p| p.to_angles()).collect())
}

/// Best autocorrelation of a series over lags 1..=max_lag.
/// Returns (lag, r).
#[pyfunction]
#[pyo3(signature = (values, max_lag = 100))]
fn best_autocorrelation(values: Vec<f64>, max_lag: usize) -> (usize, f64) {
    sweep::best_autocorrelation(&values, max_lag)
}

#[pymodule]
fn kicked_top_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(kappa_period, m)?)?;
    m.add_function(wrap_pyfunction!(parse_angle_py, m)?)?;
    m.add_function(wrap_pyfunction!(quasienergies, m)?)?;
    m.add_function(wrap_pyfunction!(otoc, m)?)?;
    m.add_function(wrap_pyfunction!(loschmidt_echo, m)?)?;
    m.add_function(wrap_pyfunction!(generalized_entanglement, m)?)?;
    m.add_function(wrap_pyfunction!(observational_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_k, m)?)?;
    m.add_function(wrap_pyfunction!(time_series, m)?)?;
    m.add_function(wrap_pyfunction!(check_period, m)?)?;
    m.add_function(wrap_pyfunction!(classical_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(phase_portrait, m)?)?;
    m.add_function(wrap_pyfunction!(best_autocorrelation, m)?)?;
    Ok(())
}
