//! Command-line surface of the `ktop` binary.
//!
//! Ten subcommands: the four measures (`otoc`, `echo`, `ge`, `oe`), the
//! spectral dump (`quasi`), the classical map (`classical`), the sweep
//! engine (`sweep-k`), the period analyses (`check-period`,
//! `reflection`), and the special-point scan (`special-k`). Every
//! command emits CSV: a '#' metadata block recording all parameters and
//! seeds, a header naming the columns, then rows with 15-significant-
//! digit floats.
//!
//! Exit codes: 0 success, 2 argument/domain errors, 1 numerical-
//! contract errors.

use clap::{Args, Parser, Subcommand};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::classical;
use crate::error::{Error, Result};
use crate::floquet::{self, FloquetParams};
use crate::measures::{self, CoarseGraining, MeasureId, MeasureSeries, SeriesExtra};
use crate::spinops::{self, CoherentAngles, Spin};
use crate::sweep::{self, KGrid, PeriodReport, SweepSpec};

/// Parses an angle that may be written symbolically: "pi", "pi/4",
/// "3*pi/2", "-pi", "0.7", "2pi/3". Symbolic forms hit exact multiples
/// of pi, which the special-case physics (alpha = pi/2, k = N pi/2)
/// is sensitive to.
pub fn parse_angle(s: &str) -> Result<f64> {
    let compact: String = s.trim().chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Domain("empty angle".into()));
    }
    if let Ok(v) = compact.parse::<f64>() {
        if !v.is_finite() {
            return Err(Error::Domain(format!("angle '{s}' is not finite")));
        }
        return Ok(v);
    }
    let lower = compact.to_ascii_lowercase();
    let Some(pi_at) = lower.find("pi") else {
        return Err(Error::Domain(format!(
            "cannot parse angle '{s}': expected a float or a multiple of pi like 3*pi/4"
        )));
    };
    let (pre, rest) = lower.split_at(pi_at);
    let post = &rest[2..];

    let coefficient = match pre.strip_suffix('*').unwrap_or(pre) {
        "" => 1.0,
        "-" => -1.0,
        c => c
            .parse::<f64>()
            .map_err(|_| Error::Domain(format!("bad coefficient '{c}' in angle '{s}'")))?,
    };
    let denominator = match post {
        "" => 1.0,
        d => {
            let d = d.strip_prefix('/').ok_or_else(|| {
                Error::Domain(format!("unexpected trailer '{d}' in angle '{s}'"))
            })?;
            let v: f64 = d
                .parse()
                .map_err(|_| Error::Domain(format!("bad denominator '{d}' in angle '{s}'")))?;
            if v == 0.0 {
                return Err(Error::Domain(format!("zero denominator in angle '{s}'")));
            }
            v
        }
    };
    Ok(coefficient * PI / denominator)
}

/// CSV float format: 17 significant digits, enough for an exact f64
/// round-trip (and comfortably inside the 1e-15 relative contract).
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Parser, Debug)]
#[command(
    name = "ktop",
    version,
    about = "Quantum kicked top: chaos measures and their kick-strength periodicity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output CSV path; stdout when omitted. Relative paths are placed
    /// under $KTOP_OUT_DIR when that variable is set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the timestamp comment so identical runs are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Out-of-time-order correlator of a seeded GOE operator.
    Otoc(OtocArgs),
    /// State-independent Loschmidt echo under a kick perturbation.
    Echo(EchoArgs),
    /// Generalized entanglement of an evolving coherent state.
    Ge(GeArgs),
    /// Observational entropy of an evolving coherent state.
    Oe(OeArgs),
    /// Quasienergy phases of the Floquet operator.
    Quasi(QuasiArgs),
    /// Classical map: single trajectory or phase portrait.
    Classical(ClassicalArgs),
    /// Generic measure sweep over a k grid.
    SweepK(SweepKArgs),
    /// Periodicity check (and minimal-period search) on a series CSV.
    CheckPeriod(CheckPeriodArgs),
    /// Loschmidt-echo reflection symmetry check on a series CSV.
    Reflection(ReflectionArgs),
    /// OTOC/GE/OE time series at the special point k = pi j + offset.
    SpecialK(SpecialKArgs),
}

/// Axis selection shared by the four measure subcommands: either a k
/// sweep at fixed m (--m with --k-start/--k-stop/--k-step), a time
/// series at fixed k (--m-max with --k), or a single point (--m, --k).
#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Spin as "N" or "N/2" (e.g. 2 or 3/2).
    #[arg(long)]
    j: String,
    /// Rotation angle; accepts literals like pi/4.
    #[arg(long)]
    alpha: String,
    /// Fixed stroboscopic time for k sweeps or single points.
    #[arg(long)]
    m: Option<usize>,
    /// Largest time of a time series at fixed k.
    #[arg(long)]
    m_max: Option<usize>,
    /// Fixed kick strength (single point or time series).
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    k_start: Option<String>,
    #[arg(long)]
    k_stop: Option<String>,
    #[arg(long)]
    k_step: Option<String>,
    /// Seed recorded with the series.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum AxisMode {
    KSweep { grid: KGrid, m: usize },
    SinglePoint { k: f64, m: usize },
    Time { k: f64, m_max: usize },
}

impl CommonArgs {
    fn spin(&self) -> Result<Spin> {
        self.j.parse()
    }

    fn alpha(&self) -> Result<f64> {
        parse_angle(&self.alpha)
    }

    fn mode(&self) -> Result<AxisMode> {
        let grid_parts = [&self.k_start, &self.k_stop, &self.k_step];
        let grid_given = grid_parts.iter().filter(|p| p.is_some()).count();
        match (self.m, self.m_max, &self.k, grid_given) {
            (Some(m), None, None, 3) => {
                let grid = KGrid::new(
                    parse_angle(self.k_start.as_ref().unwrap())?,
                    parse_angle(self.k_stop.as_ref().unwrap())?,
                    parse_angle(self.k_step.as_ref().unwrap())?,
                )?;
                Ok(AxisMode::KSweep { grid, m })
            }
            (Some(m), None, Some(k), 0) => Ok(AxisMode::SinglePoint {
                k: parse_angle(k)?,
                m,
            }),
            (None, Some(m_max), Some(k), 0) => Ok(AxisMode::Time {
                k: parse_angle(k)?,
                m_max,
            }),
            _ => Err(Error::Domain(
                "choose one axis: --m with --k-start/--k-stop/--k-step (k sweep), \
                 --m with --k (single point), or --m-max with --k (time series)"
                    .into(),
            )),
        }
    }
}

#[derive(Args, Debug)]
struct OtocArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// GOE seed for the operator W.
    #[arg(long, default_value_t = 0)]
    w_seed: u64,
}

#[derive(Args, Debug)]
struct EchoArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Perturbation dk (k' = k + dk).
    #[arg(long)]
    dk: String,
}

#[derive(Args, Debug)]
struct GeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Coherent-state polar angle.
    #[arg(long, default_value = "pi/4")]
    theta: String,
    /// Coherent-state azimuth.
    #[arg(long, default_value = "pi/4")]
    phi: String,
}

#[derive(Args, Debug)]
struct OeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value = "pi/4")]
    theta: String,
    #[arg(long, default_value = "pi/4")]
    phi: String,
    /// Macrostate block length of the default coarse graining.
    #[arg(long, default_value_t = 2)]
    coarse_len: usize,
}

#[derive(Args, Debug)]
struct QuasiArgs {
    #[arg(long)]
    j: String,
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    k: String,
    /// Fold phases modulo pi into (-pi/2, pi/2] instead of the
    /// principal (-pi, pi] window.
    #[arg(long)]
    fold_pi: bool,
}

#[derive(Args, Debug)]
struct ClassicalArgs {
    #[arg(long)]
    k: String,
    #[arg(long, default_value = "pi/2")]
    alpha: String,
    /// Initial polar angle (trajectory mode, with --phi and --n).
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    phi: Option<String>,
    /// Trajectory length.
    #[arg(long)]
    n: Option<usize>,
    /// Number of seeded initial points (portrait mode, with --n-iter).
    #[arg(long)]
    n_init: Option<usize>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SweepKArgs {
    /// One of: otoc, echo, ge, oe.
    #[arg(long)]
    measure: String,
    #[arg(long)]
    j: String,
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k_start: String,
    #[arg(long)]
    k_stop: String,
    #[arg(long)]
    k_step: String,
    #[arg(long)]
    dk: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    coarse_len: Option<usize>,
    #[arg(long)]
    w_seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct CheckPeriodArgs {
    /// Series CSV produced by a sweep subcommand.
    #[arg(long)]
    input: PathBuf,
    /// Candidate period (angle literals allowed, e.g. 8*pi).
    #[arg(long)]
    kappa: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Also search {kappa/n} for the smallest passing candidate.
    #[arg(long)]
    minimal: bool,
    /// Divisors for the minimal-period search.
    #[arg(long, default_value = "2,3,4,6")]
    divisors: String,
}

#[derive(Args, Debug)]
struct ReflectionArgs {
    /// Loschmidt-echo series CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    j: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args, Debug)]
struct SpecialKArgs {
    #[arg(long)]
    j: String,
    #[arg(long, default_value = "pi/4")]
    alpha: String,
    #[arg(long, default_value_t = 200)]
    m_max: usize,
    /// Detuning from the special point k = pi j.
    #[arg(long, default_value = "0")]
    offset: String,
    #[arg(long, default_value_t = 0)]
    w_seed: u64,
    /// Largest lag scanned for the autocorrelation summary.
    #[arg(long, default_value_t = 100)]
    max_lag: usize,
}

/// Parses argv and runs the selected subcommand.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => return Err(Error::Domain(e.to_string())),
        Err(e) => {
            // --help / --version
            print!("{e}");
            return Ok(());
        }
    };
    dispatch(cli)
}

fn dispatch(cli: Cli) -> Result<()> {
    let sink = OutputSink::new(cli.out.clone(), cli.deterministic);
    match cli.command {
        Command::Otoc(args) => run_measure(MeasureId::Otoc, &args.common, MeasureExtras {
            w_seed: Some(args.w_seed),
            ..MeasureExtras::default()
        }, &sink),
        Command::Echo(args) => {
            let dk = parse_angle(&args.dk)?;
            run_measure(MeasureId::LoschmidtEcho, &args.common, MeasureExtras {
                dk: Some(dk),
                ..MeasureExtras::default()
            }, &sink)
        }
        Command::Ge(args) => {
            let angles = CoherentAngles::new(parse_angle(&args.theta)?, parse_angle(&args.phi)?)?;
            run_measure(MeasureId::GeneralizedEntanglement, &args.common, MeasureExtras {
                angles: Some(angles),
                ..MeasureExtras::default()
            }, &sink)
        }
        Command::Oe(args) => {
            let angles = CoherentAngles::new(parse_angle(&args.theta)?, parse_angle(&args.phi)?)?;
            run_measure(MeasureId::ObservationalEntropy, &args.common, MeasureExtras {
                angles: Some(angles),
                coarse_len: Some(args.coarse_len),
                ..MeasureExtras::default()
            }, &sink)
        }
        Command::Quasi(args) => run_quasi(args, &sink),
        Command::Classical(args) => run_classical(args, &sink),
        Command::SweepK(args) => run_sweep_k(args, &sink),
        Command::CheckPeriod(args) => run_check_period(args, &sink),
        Command::Reflection(args) => run_reflection(args, &sink),
        Command::SpecialK(args) => run_special_k(args, &sink),
    }
}

/// Where CSV goes: a file (KTOP_OUT_DIR-aware) or stdout.
struct OutputSink {
    out: Option<PathBuf>,
    deterministic: bool,
}

impl OutputSink {
    fn new(out: Option<PathBuf>, deterministic: bool) -> OutputSink {
        OutputSink {
            out: out.map(resolve_out_path),
            deterministic,
        }
    }

    fn write(&self, content: &str) -> Result<()> {
        match &self.out {
            Some(path) => {
                if let Some(parent) = path.parent() {
                    if !parent.as_os_str().is_empty() {
                        fs::create_dir_all(parent)?;
                    }
                }
                fs::write(path, content)?;
                Ok(())
            }
            None => {
                std::io::stdout().write_all(content.as_bytes())?;
                Ok(())
            }
        }
    }

    /// Variant path "<stem>_<suffix>.csv" for multi-file commands.
    fn with_suffix(&self, suffix: &str) -> Option<PathBuf> {
        self.out.as_ref().map(|p| {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
            let ext = p.extension().and_then(|s| s.to_str()).unwrap_or("csv");
            p.with_file_name(format!("{stem}_{suffix}.{ext}"))
        })
    }
}

fn resolve_out_path(p: PathBuf) -> PathBuf {
    if p.is_relative() {
        if let Ok(dir) = std::env::var("KTOP_OUT_DIR") {
            if !dir.is_empty() {
                return Path::new(&dir).join(p);
            }
        }
    }
    p
}

#[derive(Default)]
struct MeasureExtras {
    dk: Option<f64>,
    angles: Option<CoherentAngles>,
    coarse_len: Option<usize>,
    w_seed: Option<u64>,
}

fn run_measure(
    measure_id: MeasureId,
    common: &CommonArgs,
    extras: MeasureExtras,
    sink: &OutputSink,
) -> Result<()> {
    let spin = common.spin()?;
    let alpha = common.alpha()?;
    let coarse = extras
        .coarse_len
        .map(|len| measures::default_coarse_graining(spin, len))
        .transpose()?;

    let series = match common.mode()? {
        AxisMode::KSweep { grid, m } => {
            let spec = build_spec(measure_id, spin, alpha, m, grid, common.seed, &extras, coarse)?;
            sweep::run_sweep(&spec)?
        }
        AxisMode::SinglePoint { k, m } => {
            // a one-point grid reuses the sweep path so extras validation
            // and series metadata stay identical
            let grid = KGrid::new(k, k + 1.0, 2.0)?;
            let spec = build_spec(measure_id, spin, alpha, m, grid, common.seed, &extras, coarse)?;
            sweep::run_sweep(&spec)?
        }
        AxisMode::Time { k, m_max } => {
            time_series(measure_id, spin, alpha, k, m_max, common.seed, &extras, coarse)?
        }
    };

    let mut meta = Vec::new();
    if let AxisMode::KSweep { m, .. } | AxisMode::SinglePoint { m, .. } = common.mode()? {
        meta.push(("m".to_string(), m.to_string()));
    }
    if let Some(len) = extras.coarse_len {
        meta.push(("coarse_len".to_string(), len.to_string()));
    }
    sink.write(&render_series_csv(&series, &meta, sink.deterministic))
}

#[allow(clippy::too_many_arguments)]
fn build_spec(
    measure_id: MeasureId,
    spin: Spin,
    alpha: f64,
    m: usize,
    grid: KGrid,
    seed: u64,
    extras: &MeasureExtras,
    coarse: Option<CoarseGraining>,
) -> Result<SweepSpec> {
    let mut spec = match measure_id {
        MeasureId::Otoc => SweepSpec::otoc(spin, alpha, m, grid, extras.w_seed.unwrap_or(0)),
        MeasureId::LoschmidtEcho => {
            let dk = extras
                .dk
                .ok_or_else(|| Error::Spec("echo needs --dk".into()))?;
            SweepSpec::loschmidt(spin, alpha, m, grid, dk)
        }
        MeasureId::GeneralizedEntanglement => {
            let angles = extras
                .angles
                .ok_or_else(|| Error::Spec("ge needs coherent angles".into()))?;
            SweepSpec::ge(spin, alpha, m, grid, angles)
        }
        MeasureId::ObservationalEntropy => {
            let angles = extras
                .angles
                .ok_or_else(|| Error::Spec("oe needs coherent angles".into()))?;
            let cg = coarse.ok_or_else(|| Error::Spec("oe needs a coarse graining".into()))?;
            SweepSpec::oe(spin, alpha, m, grid, angles, cg)
        }
    };
    spec.seed = seed;
    Ok(spec)
}

#[allow(clippy::too_many_arguments)]
fn time_series(
    measure_id: MeasureId,
    spin: Spin,
    alpha: f64,
    k: f64,
    m_max: usize,
    seed: u64,
    extras: &MeasureExtras,
    coarse: Option<CoarseGraining>,
) -> Result<MeasureSeries> {
    let p = FloquetParams::new(spin, alpha, k)?;
    let axis: Vec<f64> = (0..=m_max).map(|m| m as f64).collect();
    match measure_id {
        MeasureId::Otoc => {
            let w_seed = extras.w_seed.unwrap_or(0);
            let u = floquet::build_floquet(&p)?;
            let w = spinops::goe_sample(spin.dim(), w_seed);
            let values = measures::otoc_time_series(&u, &w, m_max)?;
            MeasureSeries::new(measure_id, p, "m", axis, values, seed, SeriesExtra::WSeed(w_seed))
        }
        MeasureId::LoschmidtEcho => {
            let dk = extras
                .dk
                .ok_or_else(|| Error::Spec("echo needs --dk".into()))?;
            let u = floquet::build_floquet(&p)?;
            let u_prime = floquet::build_floquet(&p.with_k(k + dk))?;
            let values = measures::loschmidt_time_series(&u, &u_prime, m_max)?;
            MeasureSeries::new(measure_id, p, "m", axis, values, seed, SeriesExtra::Dk(dk))
        }
        MeasureId::GeneralizedEntanglement => {
            let angles = extras
                .angles
                .ok_or_else(|| Error::Spec("ge needs coherent angles".into()))?;
            let mut series = measures::ge_series(&p, angles, m_max)?;
            series.seed = seed;
            Ok(series)
        }
        MeasureId::ObservationalEntropy => {
            let angles = extras
                .angles
                .ok_or_else(|| Error::Spec("oe needs coherent angles".into()))?;
            let cg = coarse.ok_or_else(|| Error::Spec("oe needs a coarse graining".into()))?;
            let mut series = measures::oe_series(&p, angles, &cg, m_max)?;
            series.seed = seed;
            Ok(series)
        }
    }
}

fn run_quasi(args: QuasiArgs, sink: &OutputSink) -> Result<()> {
    let spin: Spin = args.j.parse()?;
    let alpha = parse_angle(&args.alpha)?;
    let k = parse_angle(&args.k)?;
    let p = FloquetParams::new(spin, alpha, k)?;
    let spectrum = floquet::quasienergies(&floquet::build_floquet(&p)?)?;
    let phases = if args.fold_pi {
        spectrum.folded_mod_pi()
    } else {
        spectrum.phases.clone()
    };

    let mut out = String::new();
    push_meta(&mut out, "command", "quasi");
    push_meta(&mut out, "spin", &spin.to_string());
    push_meta(&mut out, "alpha", &fmt_float(alpha));
    push_meta(&mut out, "k", &fmt_float(k));
    push_meta(&mut out, "fold_pi", &args.fold_pi.to_string());
    push_timestamp(&mut out, sink.deterministic);
    out.push_str("phase_index,phase\n");
    for (i, phase) in phases.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", fmt_float(*phase)));
    }
    sink.write(&out)
}

fn run_classical(args: ClassicalArgs, sink: &OutputSink) -> Result<()> {
    let k = parse_angle(&args.k)?;
    let alpha = parse_angle(&args.alpha)?;
    let trajectory_mode = args.theta.is_some() || args.phi.is_some() || args.n.is_some();
    let portrait_mode = args.n_init.is_some() || args.n_iter.is_some();
    if trajectory_mode == portrait_mode {
        return Err(Error::Domain(
            "classical: choose trajectory mode (--theta --phi --n) or \
             portrait mode (--n-init --n-iter)"
                .into(),
        ));
    }

    let mut out = String::new();
    push_meta(&mut out, "command", "classical");
    push_meta(&mut out, "k", &fmt_float(k));
    push_meta(&mut out, "alpha", &fmt_float(alpha));

    if trajectory_mode {
        let (theta, phi, n) = match (&args.theta, &args.phi, args.n) {
            (Some(t), Some(p), Some(n)) => (parse_angle(t)?, parse_angle(p)?, n),
            _ => {
                return Err(Error::Domain(
                    "trajectory mode needs all of --theta, --phi, --n".into(),
                ))
            }
        };
        let p0 = classical::SpherePoint::from_angles(theta, phi);
        let points = classical::trajectory(p0, k, alpha, n)?;
        push_meta(&mut out, "theta", &fmt_float(theta));
        push_meta(&mut out, "phi", &fmt_float(phi));
        push_meta(&mut out, "n", &n.to_string());
        push_timestamp(&mut out, sink.deterministic);
        out.push_str("X,Y,Z\n");
        for p in points {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_float(p.x),
                fmt_float(p.y),
                fmt_float(p.z)
            ));
        }
    } else {
        let (n_init, n_iter) = match (args.n_init, args.n_iter) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Domain(
                    "portrait mode needs both --n-init and --n-iter".into(),
                ))
            }
        };
        let points = classical::phase_portrait(k, alpha, n_init, n_iter, args.seed)?;
        push_meta(&mut out, "n_init", &n_init.to_string());
        push_meta(&mut out, "n_iter", &n_iter.to_string());
        push_meta(&mut out, "seed", &args.seed.to_string());
        push_timestamp(&mut out, sink.deterministic);
        out.push_str("theta,phi\n");
        for p in points {
            let (theta, phi) = p.to_angles();
            out.push_str(&format!("{},{}\n", fmt_float(theta), fmt_float(phi)));
        }
    }
    sink.write(&out)
}

fn run_sweep_k(args: SweepKArgs, sink: &OutputSink) -> Result<()> {
    let measure_id = match args.measure.as_str() {
        "otoc" => MeasureId::Otoc,
        "echo" => MeasureId::LoschmidtEcho,
        "ge" => MeasureId::GeneralizedEntanglement,
        "oe" => MeasureId::ObservationalEntropy,
        other => {
            return Err(Error::Domain(format!(
                "unknown measure '{other}': expected otoc, echo, ge, or oe"
            )))
        }
    };
    let spin: Spin = args.j.parse()?;
    let alpha = parse_angle(&args.alpha)?;
    let grid = KGrid::new(
        parse_angle(&args.k_start)?,
        parse_angle(&args.k_stop)?,
        parse_angle(&args.k_step)?,
    )?;
    let angles = match (&args.theta, &args.phi) {
        (None, None) => None,
        (t, p) => Some(CoherentAngles::new(
            parse_angle(t.as_deref().unwrap_or("pi/4"))?,
            parse_angle(p.as_deref().unwrap_or("pi/4"))?,
        )?),
    };
    let needs_angles = matches!(
        measure_id,
        MeasureId::GeneralizedEntanglement | MeasureId::ObservationalEntropy
    );
    let extras = MeasureExtras {
        dk: args.dk.as_deref().map(parse_angle).transpose()?,
        angles: angles.or(if needs_angles {
            Some(CoherentAngles::new(PI / 4.0, PI / 4.0)?)
        } else {
            None
        }),
        coarse_len: if measure_id == MeasureId::ObservationalEntropy {
            Some(args.coarse_len.unwrap_or(2))
        } else {
            args.coarse_len
        },
        w_seed: if measure_id == MeasureId::Otoc {
            Some(args.w_seed.unwrap_or(0))
        } else {
            args.w_seed
        },
    };
    let coarse = extras
        .coarse_len
        .map(|len| measures::default_coarse_graining(spin, len))
        .transpose()?;
    let spec = build_spec(
        measure_id, spin, alpha, args.m, grid, args.seed, &extras, coarse,
    )?;
    let series = sweep::run_sweep(&spec)?;
    let mut meta = vec![
        ("command".to_string(), "sweep-k".to_string()),
        ("m".to_string(), args.m.to_string()),
    ];
    if let Some(len) = extras.coarse_len {
        meta.push(("coarse_len".to_string(), len.to_string()));
    }
    sink.write(&render_series_csv(&series, &meta, sink.deterministic))
}

fn run_check_period(args: CheckPeriodArgs, sink: &OutputSink) -> Result<()> {
    let series = read_series_csv(&args.input)?;
    let kappa = parse_angle(&args.kappa)?;
    let report = sweep::check_period(&series, kappa, args.tol)?;

    let minimal = if args.minimal {
        let divisors: Vec<u32> = args
            .divisors
            .split(',')
            .map(|d| {
                d.trim()
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad divisor '{d}'")))
            })
            .collect::<Result<_>>()?;
        Some(sweep::minimal_period(&series, kappa, &divisors, args.tol)?)
    } else {
        None
    };

    let mut out = String::new();
    push_meta(&mut out, "command", "check-period");
    push_meta(&mut out, "input", &args.input.display().to_string());
    push_timestamp(&mut out, sink.deterministic);
    render_report(&mut out, &PeriodReport { minimal_period: minimal, ..report });
    sink.write(&out)
}

fn run_reflection(args: ReflectionArgs, sink: &OutputSink) -> Result<()> {
    let series = read_series_csv(&args.input)?;
    let spin: Spin = args.j.parse()?;
    let report = sweep::reflection_check(&series, spin, args.tol)?;

    let mut out = String::new();
    push_meta(&mut out, "command", "reflection");
    push_meta(&mut out, "input", &args.input.display().to_string());
    push_meta(&mut out, "spin", &spin.to_string());
    push_timestamp(&mut out, sink.deterministic);
    render_report(&mut out, &report);
    sink.write(&out)
}

fn run_special_k(args: SpecialKArgs, sink: &OutputSink) -> Result<()> {
    let spin: Spin = args.j.parse()?;
    let alpha = parse_angle(&args.alpha)?;
    let offset = parse_angle(&args.offset)?;
    let (otoc, ge, oe) = sweep::special_k_scan(spin, alpha, args.m_max, offset, args.w_seed)?;

    let mut chunks = Vec::new();
    for (suffix, series) in [("otoc", &otoc), ("ge", &ge), ("oe", &oe)] {
        let (lag, r) = sweep::best_autocorrelation(&series.values, args.max_lag);
        let meta = vec![
            ("command".to_string(), "special-k".to_string()),
            ("offset".to_string(), fmt_float(offset)),
            ("best_autocorrelation_lag".to_string(), lag.to_string()),
            ("best_autocorrelation".to_string(), fmt_float(r)),
        ];
        let csv = render_series_csv(series, &meta, sink.deterministic);
        match sink.with_suffix(suffix) {
            Some(path) => {
                if let Some(parent) = path.parent() {
                    if !parent.as_os_str().is_empty() {
                        fs::create_dir_all(parent)?;
                    }
                }
                fs::write(path, csv)?;
            }
            None => chunks.push(csv),
        }
    }
    if !chunks.is_empty() {
        std::io::stdout().write_all(chunks.concat().as_bytes())?;
    }
    Ok(())
}

fn push_meta(out: &mut String, key: &str, value: &str) {
    out.push_str(&format!("# {key} = {value}\n"));
}

fn push_timestamp(out: &mut String, deterministic: bool) {
    if !deterministic {
        push_meta(out, "generated", &chrono::Utc::now().to_rfc3339());
    }
}

fn render_report(out: &mut String, report: &PeriodReport) {
    out.push_str("candidate_kappa,max_abs_deviation,tolerance,verdict,minimal_period\n");
    out.push_str(&format!(
        "{},{},{},{},{}\n",
        fmt_float(report.candidate_kappa),
        fmt_float(report.max_abs_deviation),
        fmt_float(report.tolerance),
        if report.pass { "pass" } else { "fail" },
        report.minimal_period.map(fmt_float).unwrap_or_default(),
    ));
}

/// Series CSV layout: '#' metadata (enough to reconstruct the
/// MeasureSeries), a two-column header, then axis/value rows.
pub fn render_series_csv(
    series: &MeasureSeries,
    extra_meta: &[(String, String)],
    deterministic: bool,
) -> String {
    let mut out = String::new();
    for (k, v) in extra_meta {
        push_meta(&mut out, k, v);
    }
    push_meta(&mut out, "measure", series.measure_id.label());
    push_meta(&mut out, "spin", &series.fixed_params.spin.to_string());
    push_meta(&mut out, "alpha", &fmt_float(series.fixed_params.alpha));
    push_meta(&mut out, "k", &fmt_float(series.fixed_params.k));
    push_meta(&mut out, "seed", &series.seed.to_string());
    match series.extra {
        SeriesExtra::None => {}
        SeriesExtra::Dk(dk) => push_meta(&mut out, "dk", &fmt_float(dk)),
        SeriesExtra::Angles(a) => {
            push_meta(&mut out, "theta", &fmt_float(a.theta));
            push_meta(&mut out, "phi", &fmt_float(a.phi));
        }
        SeriesExtra::WSeed(seed) => push_meta(&mut out, "w_seed", &seed.to_string()),
    }
    push_timestamp(&mut out, deterministic);
    out.push_str(&format!("{},{}\n", series.axis_name, series.measure_id.label()));
    for (a, v) in series.axis.iter().zip(series.values.iter()) {
        out.push_str(&format!("{},{}\n", fmt_float(*a), fmt_float(*v)));
    }
    out
}

fn measure_from_label(label: &str) -> Result<MeasureId> {
    for id in [
        MeasureId::Otoc,
        MeasureId::LoschmidtEcho,
        MeasureId::GeneralizedEntanglement,
        MeasureId::ObservationalEntropy,
    ] {
        if id.label() == label {
            return Ok(id);
        }
    }
    Err(Error::Spec(format!("unknown measure label '{label}' in series CSV")))
}

/// Reads back a series CSV written by `render_series_csv`.
pub fn read_series_csv(path: &Path) -> Result<MeasureSeries> {
    let content = fs::read_to_string(path)?;
    parse_series_csv(&content)
}

/// Parses the series CSV text format (metadata comments + two columns).
pub fn parse_series_csv(content: &str) -> Result<MeasureSeries> {
    let mut meta = HashMap::new();
    let mut header: Option<(String, String)> = None;
    let mut axis = Vec::new();
    let mut values = Vec::new();

    for line in content.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| Error::Spec(format!("series CSV row '{line}' is not two columns")))?;
        if header.is_none() {
            header = Some((a.trim().to_string(), b.trim().to_string()));
            continue;
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::Spec(format!("bad float '{s}' in series CSV")))
        };
        axis.push(parse(a)?);
        values.push(parse(b)?);
    }

    let (axis_name, value_label) =
        header.ok_or_else(|| Error::Spec("series CSV has no header".into()))?;
    let measure_id = measure_from_label(&value_label)?;
    let need = |key: &str| -> Result<&String> {
        meta.get(key)
            .ok_or_else(|| Error::Spec(format!("series CSV metadata is missing '{key}'")))
    };
    let spin: Spin = need("spin")?.parse()?;
    let alpha: f64 = need("alpha")?
        .parse()
        .map_err(|_| Error::Spec("bad alpha in series CSV metadata".into()))?;
    let k: f64 = need("k")?
        .parse()
        .map_err(|_| Error::Spec("bad k in series CSV metadata".into()))?;
    let seed: u64 = meta
        .get("seed")
        .map(|s| s.parse())
        .transpose()
        .map_err(|_| Error::Spec("bad seed in series CSV metadata".into()))?
        .unwrap_or(0);

    let extra = if let Some(dk) = meta.get("dk") {
        SeriesExtra::Dk(
            dk.parse()
                .map_err(|_| Error::Spec("bad dk in series CSV metadata".into()))?,
        )
    } else if let (Some(theta), Some(phi)) = (meta.get("theta"), meta.get("phi")) {
        let theta: f64 = theta
            .parse()
            .map_err(|_| Error::Spec("bad theta in series CSV metadata".into()))?;
        let phi: f64 = phi
            .parse()
            .map_err(|_| Error::Spec("bad phi in series CSV metadata".into()))?;
        SeriesExtra::Angles(CoherentAngles::new(theta, phi)?)
    } else if let Some(w_seed) = meta.get("w_seed") {
        SeriesExtra::WSeed(
            w_seed
                .parse()
                .map_err(|_| Error::Spec("bad w_seed in series CSV metadata".into()))?,
        )
    } else {
        SeriesExtra::None
    };

    MeasureSeries::new(
        measure_id,
        FloquetParams::new(spin, alpha, k)?,
        &axis_name,
        axis,
        values,
        seed,
        extra,
    )
}
