//! `egg-metrics`: evaluate, fit, scan and verify the invariant metrics of
//! the pseudo-egg from the command line.
//!
//! Exit codes: 0 success, 1 failed verification, 2 bad input, 3 point or
//! parameters outside the domain, 4 numerical failure.

mod parse;
mod svg;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use egg_metrics::verify::{self, Suite};
use egg_metrics::{curvature, egg_domain, ellipsoid, kobayashi, sampling, wu_metric};
use egg_metrics::{CVector, Complex, DomainPoint, EggParams, Error};

#[derive(Parser, Debug)]
#[command(
    name = "egg-metrics",
    version,
    about = "Kobayashi and Wu metrics of the pseudo-egg |z1|^{2m} + |z2|^2 + ... + |zn|^2 < 1"
)]
struct Cli {
    /// Exponent, 0 < m < 1/2.
    #[arg(long, default_value_t = 0.25, global = true)]
    m: f64,
    /// Complex dimension, n >= 2.
    #[arg(long, default_value_t = 2, global = true)]
    n: usize,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = verify::DEFAULT_SEED, global = true)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Domain,
    Kobayashi,
    Wu,
    Curvature,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Domain => Suite::Domain,
            SuiteArg::Kobayashi => Suite::Kobayashi,
            SuiteArg::Wu => Suite::Wu,
            SuiteArg::Curvature => Suite::Curvature,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    Hsc,
    #[value(name = "wu_entries")]
    WuEntries,
    #[value(name = "kobayashi_value")]
    KobayashiValue,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kobayashi metric at (p, 0, ..., 0) or at a general point.
    Kobayashi {
        #[arg(long, conflicts_with = "z")]
        p: Option<f64>,
        /// Base point as "re,im;re,im;...".
        #[arg(long)]
        z: Option<String>,
        /// Tangent vector as "re,im;re,im;...".
        #[arg(long)]
        v: String,
    },
    /// Wu metric matrix and its eigenvalues.
    Wu {
        #[arg(long, conflicts_with = "z")]
        p: Option<f64>,
        #[arg(long)]
        z: Option<String>,
    },
    /// Minimal-volume ellipsoid around the indicatrix at (p, 0, ..., 0).
    Fit {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 4096)]
        count: usize,
        /// Write the indicatrix and the fitted ellipse to this SVG file.
        #[arg(long, value_name = "PATH")]
        emit_svg: Option<std::path::PathBuf>,
    },
    /// Runs an invariant suite over the standard parameter grid.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
    /// Tabulates a quantity over a grid of axis points p.
    Scan {
        #[arg(long, value_enum)]
        quantity: Quantity,
        /// "a,b,c" or "start:stop:count"; empty for no rows.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Directions per point for hsc and kobayashi_value.
        #[arg(long, default_value_t = 16)]
        directions: usize,
    },
}

enum Failure {
    Input(String),
    Lib(Error),
    Verification,
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(io::Error::other(e))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(io::Error::other(e))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(4)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("WU_METRIC_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("WU_METRIC_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let params = EggParams::new(cli.n, cli.m)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match &cli.command {
        Command::Kobayashi { p, z, v } => cmd_kobayashi(cli, &params, *p, z.as_deref(), v, &mut out),
        Command::Wu { p, z } => cmd_wu(cli, &params, *p, z.as_deref(), &mut out),
        Command::Fit { p, count, emit_svg } => {
            cmd_fit(cli, &params, *p, *count, emit_svg.as_deref(), &mut out)
        }
        Command::Verify { suite } => cmd_verify(cli, (*suite).into(), &mut out),
        Command::Scan {
            quantity,
            grid,
            directions,
        } => cmd_scan(cli, &params, *quantity, grid, *directions, &mut out),
    }
}

fn vector_arg(params: &EggParams, s: &str, what: &str) -> Result<CVector, Failure> {
    let v = parse::complex_vector(s).map_err(|e| Failure::Input(format!("--{what}: {e}")))?;
    if v.len() != params.n() {
        return Err(Failure::Input(format!(
            "--{what} has {} entries but n = {}",
            v.len(),
            params.n()
        )));
    }
    Ok(v)
}

fn base_point(params: &EggParams, p: Option<f64>, z: Option<&str>) -> Result<DomainPoint, Failure> {
    match (p, z) {
        (Some(p), None) => Ok(DomainPoint::axis(params, p)?),
        (None, Some(z)) => Ok(DomainPoint::new(params, vector_arg(params, z, "z")?)?),
        (None, None) => Ok(DomainPoint::origin(params)),
        (Some(_), Some(_)) => Err(Failure::Input("give either --p or --z".into())),
    }
}

fn write_json<T: Serialize>(out: &mut impl Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Shortest representation that parses back to the same double.
fn fmt(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

#[derive(Serialize)]
struct ComplexOut {
    re: f64,
    im: f64,
}

impl From<Complex> for ComplexOut {
    fn from(c: Complex) -> Self {
        Self { re: c.re, im: c.im }
    }
}

#[derive(Serialize)]
struct KobayashiOut {
    m: f64,
    n: usize,
    z: Vec<ComplexOut>,
    v: Vec<ComplexOut>,
    /// `p` is the axis coordinate of the normalized base point.
    #[serde(flatten)]
    breakdown: kobayashi::KobayashiBreakdown,
}

fn cmd_kobayashi(
    cli: &Cli,
    params: &EggParams,
    p: Option<f64>,
    z: Option<&str>,
    v: &str,
    out: &mut impl Write,
) -> Result<(), Failure> {
    let base = base_point(params, p, z)?;
    let v = vector_arg(params, v, "v")?;
    let nz = egg_domain::normalize(params, &base)?;
    let jv = nz.automorphism.jacobian(base.coords()) * &v;
    let (value, breakdown) = kobayashi::kobayashi_axis(params, nz.axis, &jv)?;
    let record = KobayashiOut {
        m: params.m(),
        n: params.n(),
        z: base.coords().iter().map(|&c| c.into()).collect(),
        v: v.iter().map(|&c| c.into()).collect(),
        breakdown,
    };
    match cli.format {
        Format::Json => write_json(out, &record),
        Format::Csv => {
            let b = &record.breakdown;
            let w = match b.w {
                Some(kobayashi::WValue::Finite(w)) => fmt(w),
                Some(kobayashi::WValue::Infinite) => "inf".into(),
                None => String::new(),
            };
            let mut wtr = csv_writer(out);
            wtr.write_record([
                "m", "n", "p", "value", "regime", "w", "t", "alpha", "k1", "k2", "x0", "t0", "w0",
            ])?;
            wtr.write_record([
                fmt(record.m),
                record.n.to_string(),
                fmt(b.p),
                fmt(value),
                serde_json::to_value(b.regime)?
                    .as_str()
                    .unwrap_or_default()
                    .to_string(),
                w,
                opt(b.t),
                opt(b.alpha),
                opt(b.k1),
                opt(b.k2),
                opt(b.x0),
                opt(b.t0),
                opt(b.w0),
            ])?;
            wtr.flush()?;
            Ok(())
        }
    }
}

fn cmd_wu(
    cli: &Cli,
    params: &EggParams,
    p: Option<f64>,
    z: Option<&str>,
    out: &mut impl Write,
) -> Result<(), Failure> {
    let base = base_point(params, p, z)?;
    let form = wu_metric::wu_general(params, &base);
    match cli.format {
        Format::Json => write_json(out, &form),
        Format::Csv => {
            let mut wtr = csv_writer(out);
            wtr.write_record(["i", "j", "re", "im"])?;
            for i in 0..form.dim() {
                for j in 0..form.dim() {
                    let c = form.entries[(i, j)];
                    wtr.write_record([(i + 1).to_string(), (j + 1).to_string(), fmt(c.re), fmt(c.im)])?;
                }
            }
            wtr.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FitOut {
    m: f64,
    n: usize,
    p: f64,
    #[serde(flatten)]
    fit: ellipsoid::EllipsoidFit,
    r1_reference: f64,
    r2_reference: f64,
    r1_relative_error: f64,
    r2_relative_error: f64,
}

fn cmd_fit(
    cli: &Cli,
    params: &EggParams,
    p: f64,
    count: usize,
    svg_path: Option<&std::path::Path>,
    out: &mut impl Write,
) -> Result<(), Failure> {
    let samples = if count < ellipsoid::MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: ellipsoid::MIN_FIT_SAMPLES,
            got: count,
        }
        .into());
    } else {
        kobayashi::indicatrix_boundary(params, p, count)?
    };
    let fit = ellipsoid::fit_samples(params, &samples, ellipsoid::FitMethod::Reduced)?;
    let reference = wu_metric::wu_axis(params, p)?;
    let r1_reference = reference.entries[(0, 0)].re;
    let r2_reference = reference.entries[(1, 1)].re;
    let record = FitOut {
        m: params.m(),
        n: params.n(),
        p,
        fit,
        r1_reference,
        r2_reference,
        r1_relative_error: (fit.r1 - r1_reference).abs() / r1_reference,
        r2_relative_error: (fit.r2 - r2_reference).abs() / r2_reference,
    };
    if let Some(path) = svg_path {
        std::fs::write(path, svg::render(&samples, &fit, params.m(), p))?;
    }
    match cli.format {
        Format::Json => write_json(out, &record),
        Format::Csv => {
            let mut wtr = csv_writer(out);
            wtr.write_record([
                "m",
                "n",
                "p",
                "r1",
                "r2",
                "objective",
                "max_violation",
                "samples_used",
                "r1_reference",
                "r2_reference",
                "r1_relative_error",
                "r2_relative_error",
            ])?;
            wtr.write_record([
                fmt(record.m),
                record.n.to_string(),
                fmt(p),
                fmt(fit.r1),
                fmt(fit.r2),
                fmt(fit.objective),
                fmt(fit.max_violation),
                fit.samples_used.to_string(),
                fmt(r1_reference),
                fmt(r2_reference),
                fmt(record.r1_relative_error),
                fmt(record.r2_relative_error),
            ])?;
            wtr.flush()?;
            Ok(())
        }
    }
}

fn cmd_verify(cli: &Cli, suite: Suite, out: &mut impl Write) -> Result<(), Failure> {
    let report = verify::run_suite(suite, cli.seed);
    match cli.format {
        Format::Json => write_json(out, &report)?,
        Format::Csv => {
            let mut wtr = csv_writer(&mut *out);
            wtr.write_record([
                "suite",
                "check",
                "m",
                "n",
                "bound",
                "threshold",
                "measured",
                "margin",
                "passed",
                "error",
            ])?;
            for c in &report.checks {
                wtr.write_record([
                    c.suite.to_string(),
                    c.name.to_string(),
                    fmt(c.m),
                    c.n.to_string(),
                    match c.bound {
                        verify::Bound::Upper => "upper".into(),
                        verify::Bound::Lower => "lower".into(),
                    },
                    fmt(c.threshold),
                    fmt(c.measured),
                    fmt(c.margin()),
                    c.passed.to_string(),
                    c.error.clone().unwrap_or_default(),
                ])?;
            }
            wtr.flush()?;
        }
    }
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "FAIL {}/{} m={} n={}: measured {} vs threshold {}{}",
            c.suite,
            c.name,
            c.m,
            c.n,
            c.measured,
            c.threshold,
            c.error.as_ref().map(|e| format!(" ({e})")).unwrap_or_default()
        );
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_scan(
    cli: &Cli,
    params: &EggParams,
    quantity: Quantity,
    grid: &str,
    directions: usize,
    out: &mut impl Write,
) -> Result<(), Failure> {
    use rayon::prelude::*;

    let ps = parse::grid(grid).map_err(|e| Failure::Input(format!("--grid: {e}")))?;
    let n = params.n();
    let header: Vec<String> = match quantity {
        Quantity::Hsc | Quantity::KobayashiValue => {
            ["m", "n", "p", "direction", "value"].map(String::from).to_vec()
        }
        Quantity::WuEntries => {
            let mut h: Vec<String> = ["m", "n", "p"].map(String::from).to_vec();
            for i in 1..=n {
                for j in 1..=n {
                    h.push(format!("h{i}_{j}_re"));
                    h.push(format!("h{i}_{j}_im"));
                }
            }
            h
        }
    };
    let dirs = sampling::sphere_directions(n, directions);
    let rows: Vec<Vec<Vec<String>>> = ps
        .par_iter()
        .map(|&p| -> Result<Vec<Vec<String>>, Error> {
            let lead = vec![fmt(params.m()), n.to_string(), fmt(p)];
            match quantity {
                Quantity::Hsc => {
                    let r = curvature::curvature_axis_closed_form(params, p)?;
                    let g = wu_metric::wu_axis(params, p)?.entries;
                    Ok(dirs
                        .iter()
                        .enumerate()
                        .map(|(d, xi)| {
                            let mut row = lead.clone();
                            row.push(d.to_string());
                            row.push(fmt(curvature::hsc_from(&r, &g, xi)));
                            row
                        })
                        .collect())
                }
                Quantity::KobayashiValue => dirs
                    .iter()
                    .enumerate()
                    .map(|(d, v)| {
                        let mut row = lead.clone();
                        row.push(d.to_string());
                        row.push(fmt(kobayashi::kobayashi_axis(params, p, v)?.0));
                        Ok(row)
                    })
                    .collect(),
                Quantity::WuEntries => {
                    let h = wu_metric::wu_general(params, &DomainPoint::axis(params, p)?);
                    let mut row = lead;
                    for c in h.entries.transpose().iter() {
                        row.push(fmt(c.re));
                        row.push(fmt(c.im));
                    }
                    Ok(vec![row])
                }
            }
        })
        .collect::<Result<_, Error>>()?;
    match cli.format {
        Format::Csv => {
            let mut wtr = csv_writer(out);
            wtr.write_record(&header)?;
            for row in rows.iter().flatten() {
                wtr.write_record(row)?;
            }
            wtr.flush()?;
            Ok(())
        }
        Format::Json => {
            let records: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .flatten()
                .map(|row| {
                    header
                        .iter()
                        .zip(row)
                        .map(|(k, v)| {
                            let value = if let Ok(i) = v.parse::<i64>() {
                                serde_json::Value::from(i)
                            } else {
                                v.parse::<f64>()
                                    .ok()
                                    .and_then(|x| {
                                        serde_json::Number::from_f64(x).map(serde_json::Value::Number)
                                    })
                                    .unwrap_or_else(|| serde_json::Value::String(v.clone()))
                            };
                            (k.clone(), value)
                        })
                        .collect()
                })
                .collect();
            write_json(out, &records)
        }
    }
}
