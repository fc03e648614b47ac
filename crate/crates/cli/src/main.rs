use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use warpcurv::{
    audit_profile, conformal_field_check, curvature_audit, log_energy_grid, period_quadrature,
    period_scan, scan_branches, solve_period, AuditReport, ConformalReport, CurvatureReport,
    DerivedConstants, Error, ModelParams, OrbitSpec, SolutionProfile,
};

mod output;

use output::{csv, json, num, Format};

#[derive(Debug, Parser)]
#[command(
    name = "warpcurv",
    version,
    about = "Periodic warping functions of constant scalar curvature on S^1 x_f N"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for scans (default: all available)
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,

    /// Output format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output to FILE instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Total dimension n of S^1 x N (n >= 3)
    #[arg(long)]
    n: u32,

    /// Scalar curvature R of the fiber metric
    #[arg(long = "fiber-curv", value_name = "R")]
    fiber_curv: f64,

    /// Target scalar curvature of the warped product
    #[arg(long = "target-curv", value_name = "RT")]
    target_curv: f64,
}

impl ParamArgs {
    fn params(&self) -> warpcurv::Result<ModelParams> {
        ModelParams::new(self.n, self.fiber_curv, self.target_curv)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Threshold period and derived constants
    Threshold {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Period of the orbit at one energy, or a scan over the energy band
    Period {
        #[command(flatten)]
        params: ParamArgs,
        /// Single energy c with c_min < c < 0
        #[arg(long, conflicts_with = "scan", allow_negative_numbers = true)]
        energy: Option<f64>,
        /// Number of log-spaced energies to scan (the default mode)
        #[arg(long, value_name = "N", default_value_t = 200)]
        scan: usize,
        /// Energy band "lo,hi" for the scan (default: the clamped band)
        #[arg(
            long,
            value_name = "LO,HI",
            allow_hyphen_values = true,
            conflicts_with = "energy"
        )]
        band: Option<String>,
    },
    /// Solve for a periodic warping function of prescribed minimal period
    Solve {
        #[command(flatten)]
        params: ParamArgs,
        /// Target minimal period T
        #[arg(long)]
        period: f64,
        /// Samples over one period
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Branches of non-constant solutions up to circle length tmax
    Bifurcate {
        #[command(flatten)]
        params: ParamArgs,
        /// Largest circle length scanned
        #[arg(long)]
        tmax: f64,
        /// Number of grid steps in (T0, tmax]
        #[arg(long, default_value_t = 400)]
        grid: usize,
    },
    /// Audit a solved profile written by `solve`
    Verify {
        /// Profile JSON file
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Curvature tolerance (default: 1e-4 * Rt)
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::ThresholdViolation { .. }) => 3,
            Some(
                Error::Domain(_)
                | Error::EnergyOutOfBand { .. }
                | Error::TooFewSamples { .. }
                | Error::NonPositiveWarp { .. },
            ) => 2,
            Some(_) => 4,
            None => 2,
        };
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(anyhow::anyhow!("--threads must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let mut buf = Vec::new();
    let code = match &cli.command {
        Command::Threshold { params } => {
            threshold(
                &params.params()?,
                cli.format.unwrap_or(Format::Csv),
                &mut buf,
            )?;
            0
        }
        Command::Period {
            params,
            energy,
            scan,
            band,
        } => {
            let p = params.params()?;
            let format = cli.format.unwrap_or(Format::Csv);
            match energy {
                Some(c) => orbits(&[period_quadrature(*c, &p)?], format, &mut buf)?,
                None => {
                    let band = band.as_deref().map(parse_band).transpose()?;
                    let grid = log_energy_grid(&p, *scan, band);
                    let specs = period_scan(&grid, &p)
                        .into_iter()
                        .collect::<warpcurv::Result<Vec<_>>>()?;
                    orbits(&specs, format, &mut buf)?;
                }
            }
            0
        }
        Command::Solve {
            params,
            period,
            samples,
        } => {
            let prof = solve_period(*period, &params.params()?, *samples)?;
            profile(&prof, cli.format.unwrap_or(Format::Json), &mut buf)?;
            0
        }
        Command::Bifurcate { params, tmax, grid } => {
            let d = scan_branches(*tmax, *grid, &params.params()?)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Json => json(&d, &mut buf)?,
                Format::Csv => {
                    let rows: Vec<Vec<String>> = d
                        .rows
                        .iter()
                        .map(|r| {
                            vec![
                                num(r.period),
                                r.k.to_string(),
                                num(r.c),
                                num(r.amplitude),
                                num(r.max_f),
                                num(r.min_f),
                            ]
                        })
                        .collect();
                    csv(
                        &["T", "k", "c", "amplitude", "max_f", "min_f"],
                        &rows,
                        &mut buf,
                    )?;
                }
            }
            0
        }
        Command::Verify { input, tol } => {
            let text = std::fs::read_to_string(input)
                .with_context(|| format!("reading {}", input.display()))?;
            let prof: SolutionProfile = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", input.display()))?;
            let tol = tol.unwrap_or(1e-4 * prof.params.target_curvature());
            let v = verify(&prof, tol)?;
            json(&v, &mut buf)?;
            if v.passed {
                0
            } else {
                eprintln!("error: audit tolerance exceeded");
                4
            }
        }
    };
    emit(cli.out.as_ref(), &buf)?;
    Ok(code)
}

fn emit(path: Option<&PathBuf>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(path) => {
            let mut w = BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            );
            w.write_all(bytes)?;
            w.flush()?;
        }
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn parse_band(s: &str) -> anyhow::Result<(f64, f64)> {
    let Some((lo, hi)) = s.split_once(',') else {
        bail!("--band expects \"lo,hi\", got {s:?}");
    };
    let lo: f64 = lo.trim().parse().context("--band lower end")?;
    let hi: f64 = hi.trim().parse().context("--band upper end")?;
    if lo >= hi || lo.is_nan() || hi.is_nan() {
        bail!("--band needs lo < hi, got {lo}, {hi}");
    }
    Ok((lo, hi))
}

#[derive(Serialize)]
struct ThresholdOut {
    n: u32,
    #[serde(rename = "R")]
    r: f64,
    #[serde(rename = "Rt")]
    rt: f64,
    #[serde(flatten)]
    constants: DerivedConstants,
}

fn threshold(p: &ModelParams, format: Format, out: &mut Vec<u8>) -> anyhow::Result<()> {
    let d = p.derive_constants();
    match format {
        Format::Json => json(
            &ThresholdOut {
                n: p.n(),
                r: p.fiber_curvature(),
                rt: p.target_curvature(),
                constants: d,
            },
            out,
        ),
        Format::Csv => csv(
            &["n", "R", "Rt", "f_star", "x_star", "T0", "c_min", "c_crit"],
            &[vec![
                p.n().to_string(),
                num(p.fiber_curvature()),
                num(p.target_curvature()),
                num(d.f_star),
                num(d.x_star),
                num(d.t0),
                num(d.c_min),
                num(d.c_crit),
            ]],
            out,
        ),
    }
}

fn orbits(specs: &[OrbitSpec], format: Format, out: &mut Vec<u8>) -> anyhow::Result<()> {
    match format {
        Format::Json => json(&specs, out),
        Format::Csv => {
            let rows: Vec<Vec<String>> = specs
                .iter()
                .map(|o| {
                    vec![
                        num(o.c),
                        num(o.a),
                        num(o.b),
                        num(o.period),
                        num(o.amplitude()),
                    ]
                })
                .collect();
            csv(&["c", "a", "b", "T", "amplitude"], &rows, out)
        }
    }
}

fn profile(prof: &SolutionProfile, format: Format, out: &mut Vec<u8>) -> anyhow::Result<()> {
    match format {
        Format::Json => json(prof, out),
        Format::Csv => {
            let rows: Vec<Vec<String>> = prof
                .samples
                .iter()
                .map(|s| [s.t, s.x, s.v, s.f, s.fp, s.fpp].map(num).to_vec())
                .collect();
            csv(&["t", "x", "v", "f", "fp", "fpp"], &rows, out)
        }
    }
}

#[derive(Serialize)]
struct Verification {
    passed: bool,
    curvature: CurvatureReport,
    audit: AuditReport,
    conformal: ConformalReport,
}

fn verify(prof: &SolutionProfile, tol: f64) -> Result<Verification, Failure> {
    let curvature = curvature_audit(prof, tol)?;
    let audit = audit_profile(prof);
    let conformal = conformal_field_check(prof);
    Ok(Verification {
        passed: curvature.passed && audit.passed && conformal.squared_passes,
        curvature,
        audit,
        conformal,
    })
}
