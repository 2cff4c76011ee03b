//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a check fails or an input matrix is not
//! positive definite, 2 on usage errors and malformed input.

mod commands;
mod files;
mod render;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;

pub use files::{calibration_to_json, parse_matrix, read_calibration, CALIBRATION_FORMAT_VERSION};
pub use render::CSV_HEADER;

#[derive(Debug, Parser)]
#[command(name = "spdrisk", version, about = "Covariance estimator risk experiments")]
pub struct Cli {
    /// Worker threads for Monte Carlo (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,

    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    pub json: bool,

    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic and Monte Carlo risks, one row per estimator and loss.
    RiskTable(RiskTableArgs),
    /// Ordering, gap and local-optimality checks.
    Verify(VerifyArgs),
    /// Cholesky factor, Iwasawa pivots and eigenvalues of a matrix file.
    Decompose(DecomposeArgs),
    /// Draw Wishart scatter matrices.
    Sample(SampleArgs),
    /// Estimate the sorted-eigenvalue means used by the rotation-equivariant estimators.
    Calibrate(CalibrateArgs),
    /// Spectrum statistics against their large-dimension references.
    Spectra(SpectraArgs),
}

#[derive(Debug, Args)]
pub struct Dims {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    #[arg(long, env = "SPDRISK_SEED", default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RiskTableArgs {
    #[command(flatten)]
    pub dims: Dims,
    #[arg(long, default_value_t = 100_000)]
    pub replicates: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Only this loss.
    #[arg(long)]
    pub loss: Option<String>,
    /// Comma-separated estimator names (default: all registered).
    #[arg(long, value_delimiter = ',')]
    pub estimators: Vec<String>,
    /// Calibration file: read if present, otherwise computed and written here.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub replicates: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Log-scale step for the local-optimality perturbations.
    #[arg(long, default_value_t = 0.2)]
    pub perturbation: f64,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Matrix file (`-` for stdin).
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub dims: Dims,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Σ as a matrix file (default: identity).
    #[arg(long)]
    pub sigma: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub dims: Dims,
    #[arg(long, default_value_t = 200_000)]
    pub replicates: usize,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    #[command(flatten)]
    pub dims: Dims,
    #[arg(long, default_value_t = 1_000)]
    pub replicates: usize,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotPositiveDefinite { .. } | Error::NoConvergence { .. } => {
                CliError::Failure(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Rendered output plus the exit code it implies.
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: 0 }
    }
}

impl Cli {
    fn output_format(&self) -> OutputFormat {
        if self.json {
            OutputFormat::Json
        } else {
            self.format
        }
    }
}

/// Runs a parsed command and returns its output and exit code.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let format = cli.output_format();
    let body = || match &cli.command {
        Command::RiskTable(a) => commands::risk_table(a, format),
        Command::Verify(a) => commands::verify(a, format),
        Command::Decompose(a) => commands::decompose(a, format),
        Command::Sample(a) => commands::sample(a, format),
        Command::Calibrate(a) => commands::calibrate(a, format),
        Command::Spectra(a) => commands::spectra(a, format),
    };
    match cli.workers {
        Some(0) => Err(CliError::usage("--workers must be positive")),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Failure(e.to_string()))?
            .install(body),
        None => body(),
    }
}

/// Entry point: parses `args`, runs the command, writes output, returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &outcome.text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(outcome.text.as_bytes()).and_then(|_| out.flush())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return 2;
    }
    outcome.code
}
