//! `twistorlab`: batch front end for the twistor and flag-manifold computations.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use twistorlab_core::Error;

#[derive(Parser, Debug)]
#[command(name = "twistorlab", version, about = "Numerical twistor geometry of Hermitian surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Symplectic, balanced and integrability flags at seeded twistor points.
    Report(ReportArgs),
    /// Runs the acceptance battery.
    Verify(VerifyArgs),
    /// Sweeps λ and locates zeros of dK_i.
    Scan(ScanArgs),
    /// Exact invariant forms on the flag manifold.
    Appendix(AppendixArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SurfaceArgs {
    /// Built-in name (flat_c2, cp2_fs, ch2, hopf) or a surface description file.
    #[arg(long)]
    pub surface: String,
    /// Built-in parameters as k=v,...
    #[arg(long, value_parser = parse_params)]
    pub params: Option<Params>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionArg {
    Lichnerowicz,
    Chern,
    Bismut,
    Gauduchon,
}

#[derive(Args, Debug, Clone)]
pub struct ConnectionArgs {
    #[arg(long, value_enum)]
    pub connection: ConnectionArg,
    /// Parameter of the Gauduchon line.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 5)]
    pub points: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Written atomically; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct LambdaArgs {
    /// One-parameter family (1, 1, λ); repeatable.
    #[arg(long)]
    pub lambda: Vec<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub lambda3: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[command(flatten)]
    pub connection: ConnectionArgs,
    #[command(flatten)]
    pub lambdas: LambdaArgs,
    #[command(flatten)]
    pub sample: SampleArgs,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// appendix, cp2, oracle, integrability, relations, conformal, gauduchon, algebra or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Residual threshold for the oracle suite.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[command(flatten)]
    pub connection: ConnectionArgs,
    /// Structure index; all four when absent.
    #[arg(long)]
    pub i: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub lambda_max: f64,
    /// Number of grid values.
    #[arg(long, default_value_t = 16)]
    pub steps: usize,
    #[command(flatten)]
    pub sample: SampleArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct AppendixArgs {
    #[command(flatten)]
    pub lambdas: LambdaArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// `k=v` pairs for built-in parameters.
#[derive(Debug, Clone)]
pub struct Params(pub Vec<(String, f64)>);

fn parse_params(s: &str) -> Result<Params, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| format!("expected k=v, got '{p}'"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("bad value in '{p}'"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Params)
}

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Invariant(String),
    Verify(Vec<String>),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant { .. } | Error::DegenerateSeed(_) | Error::Boundary(_) | Error::NonUnitary => {
                Failure::Invariant(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("TWISTORLAB_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Usage(format!("TWISTORLAB_THREADS must be a positive integer, got '{v}'"))
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Report(a) => commands::report(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Scan(a) => commands::scan(&a),
        Command::Appendix(a) => commands::appendix(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("run `twistorlab --help` for usage");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant failure: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Verify(failed)) => {
            eprintln!("verification failed: {}", failed.join(", "));
            ExitCode::from(1)
        }
        Err(Failure::Io(m)) => {
            eprintln!("i/o error: {m}");
            ExitCode::from(1)
        }
    }
}
