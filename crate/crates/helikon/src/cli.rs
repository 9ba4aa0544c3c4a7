//! Argument parsing and dispatch for the `helikon` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{
    mesh_output, solve_output, sweep_output, MeshCommand, MeshFormat, MeshSource, SolveConfig, SweepConfig,
};
use crate::io;
use crate::parallel::threads_from_env;
use crate::verify::{self, Perturbation, VerifyConfig};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "helikon", version, about = "Solve, sweep, mesh and verify genus-one helicoids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the period problem for one or more k.
    Solve(SolveArgs),
    /// Tabulate period residuals on a (theta, b) grid.
    Sweep(SweepArgs),
    /// Immerse a solution (or the reference helicoid) and write a mesh and report.
    Mesh(MeshArgs),
    /// Run the verification battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Comma-separated list of k > 1/2.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub k: Vec<f64>,
    #[arg(long, default_value_t = 1.2)]
    pub theta_lo: f64,
    #[arg(long, default_value_t = 2.2)]
    pub theta_hi: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_h: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_v: f64,
    /// Worker threads (falls back to HELIKON_THREADS, then the core count).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub k: f64,
    /// `lo,hi,count`
    #[arg(long, value_delimiter = ',', default_values_t = [1.6, 2.1, 6.0])]
    pub theta: Vec<f64>,
    /// `lo,hi,count`; the admissible range of `k` with 9 points when absent.
    #[arg(long, value_delimiter = ',')]
    pub b: Option<Vec<f64>>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Obj,
    Ply,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    /// Solution JSON written by `solve`.
    #[arg(long, conflicts_with_all = ["helicoid", "theta", "b"])]
    pub from: Option<PathBuf>,
    /// Mesh the reference helicoid of index `k`.
    #[arg(long)]
    pub helicoid: bool,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Grid size of the fundamental domain (angular samples for the helicoid).
    #[arg(long, default_value_t = 64)]
    pub res: usize,
    #[arg(long, default_value_t = 0.05)]
    pub cutoff: f64,
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    /// Mesh parameters that do not solve the period problem.
    #[arg(long)]
    pub force: bool,
    /// Mesh format; inferred from the output extension when absent.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub no_intersections: bool,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Report JSON; `<out>.report.json` when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbArg {
    QuasiSign,
    ShiftTheta,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check names or criterion numbers, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Inject a known fault (negative control).
    #[arg(long, value_enum)]
    pub perturb: Option<PerturbArg>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Report JSON; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn triple(v: &[f64], name: &str) -> Result<(f64, f64, usize), CliError> {
    match v {
        [lo, hi, n] if *n >= 1.0 && n.fract() == 0.0 => Ok((*lo, *hi, *n as usize)),
        _ => Err(CliError::Config(format!("--{name} expects lo,hi,count"))),
    }
}

pub fn run_solve(a: &SolveArgs) -> Result<(), CliError> {
    let cfg = SolveConfig {
        ks: a.k.clone(),
        theta_bracket: (a.theta_lo, a.theta_hi),
        tol_h: a.tol_h,
        tol_v: a.tol_v,
        threads: threads_from_env(a.threads)?,
    };
    let (bytes, ok) = solve_output(&cfg)?;
    write_output(a.out.as_deref(), &bytes)?;
    if ok {
        Ok(())
    } else {
        Err(CliError::Math("no root found; the scan table is in the output".into()))
    }
}

pub fn run_sweep(a: &SweepArgs) -> Result<(), CliError> {
    let cfg = SweepConfig {
        k: a.k,
        theta: triple(&a.theta, "theta")?,
        b: a.b.as_deref().map(|v| triple(v, "b")).transpose()?,
        threads: threads_from_env(a.threads)?,
    };
    write_output(a.out.as_deref(), &sweep_output(&cfg)?)
}

pub fn run_mesh(a: &MeshArgs) -> Result<(), CliError> {
    let source = match (&a.from, a.helicoid, a.k, a.theta, a.b) {
        (Some(p), false, None, None, None) => MeshSource::Solution(p.clone()),
        (None, true, Some(k), None, None) => MeshSource::Helicoid { k },
        (None, true, None, None, None) => MeshSource::Helicoid { k: 1.0 },
        (None, false, Some(k), Some(theta), Some(b)) => MeshSource::Params { k, theta, b },
        _ => {
            return Err(CliError::Config(
                "give exactly one of --from FILE, --helicoid [--k K], or --k K --theta T --b B".into(),
            ))
        }
    };
    let format = match a.format {
        Some(FormatArg::Obj) => MeshFormat::Obj,
        Some(FormatArg::Ply) => MeshFormat::Ply,
        None => match a.out.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ply") => MeshFormat::Ply,
            _ => MeshFormat::Obj,
        },
    };
    let cmd = MeshCommand {
        source,
        resolution: a.res,
        end_cutoff: a.cutoff,
        copies: a.copies,
        force: a.force,
        format,
        skip_intersections: a.no_intersections,
    };
    let out = mesh_output(&cmd)?;
    write_output(Some(&a.out), &out.mesh_bytes(format)?)?;
    let report = a.report.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".report.json");
        PathBuf::from(p)
    });
    write_output(Some(&report), &out.report_bytes()?)
}

pub fn run_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let cfg = VerifyConfig {
        only: a.only.clone(),
        perturb: a.perturb.map(|p| match p {
            PerturbArg::QuasiSign => Perturbation::QuasiSign,
            PerturbArg::ShiftTheta => Perturbation::ShiftTheta,
        }),
        threads: threads_from_env(a.threads)?,
    };
    let report = verify::run(&cfg)?;
    for c in &report.checks {
        eprintln!("{}", c.line());
    }
    write_output(a.out.as_deref(), io::to_json(&report)?.as_bytes())?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<String> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.to_string()).collect();
        Err(CliError::Math(format!("failed checks: {}", failed.join(", "))))
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let r = match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Mesh(a) => run_mesh(a),
        Command::Verify(a) => run_verify(a),
    };
    match r {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("helikon: {e}");
            e.exit_code()
        }
    }
}
