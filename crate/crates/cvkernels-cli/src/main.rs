//! Command line front end for the continuous-variable kernel library.
//!
//! Exit codes: 0 on success, 1 when a verification or tolerance gate
//! fails, 2 for usage errors, 3 for data errors (unreadable or malformed
//! input files, unsolvable systems).

mod commands;
mod data;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvkernels::states::StateFamily;

#[derive(Parser)]
#[command(
    name = "cvk",
    version,
    about = "Quantum kernel scans, verification sweeps, and ridge regression for continuous-variable states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan the nonclassicality witness over separations, one curve per
    /// loss value, and write plot-ready CSV columns plus a JSON summary.
    Witness(WitnessArgs),
    /// Compare closed-form kernels against the numeric oracle over a
    /// separation and transmissivity grid; exits 1 on a tolerance breach.
    Verify(VerifyArgs),
    /// Evaluate the Gram matrix of a dataset.
    Gram(GramArgs),
    /// Fit kernel ridge regression coefficients and write a model file.
    Fit(FitArgs),
    /// Predict labels for query points from a fitted model file.
    Predict(PredictArgs),
    /// Report feature-space geometry of a dataset next to the coherent
    /// baseline.
    Geometry(GeometryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Coherent,
    Squeezed,
    SinglePhoton,
    Thermal,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct FamilyOpts {
    /// Base state family.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Squeezing parameter, squeezed family only (default 1).
    #[arg(long)]
    r: Option<f64>,
    /// Mean photon number, thermal family only (default 0.5).
    #[arg(long)]
    nbar: Option<f64>,
}

impl FamilyOpts {
    fn resolve(&self) -> Result<StateFamily, CliError> {
        commands::resolve_family(self.family, self.r, self.nbar)
    }
}

#[derive(Args)]
struct ChannelOpt {
    /// Photon loss fraction in [0, 1]; loss = 1 - eta.
    #[arg(long, conflicts_with = "eta")]
    loss: Option<f64>,
    /// Transmissivity in [0, 1]; eta = 1 means no loss.
    #[arg(long)]
    eta: Option<f64>,
}

impl ChannelOpt {
    fn resolve(&self) -> Result<f64, CliError> {
        match (self.loss, self.eta) {
            (Some(l), None) => {
                if !(0.0..=1.0).contains(&l) {
                    return Err(CliError::Usage(format!(
                        "--loss {l} is outside [0, 1]"
                    )));
                }
                Ok(1.0 - l)
            }
            (None, Some(e)) => Ok(e),
            (None, None) => Ok(1.0),
            (Some(_), Some(_)) => unreachable!("clap rejects --loss with --eta"),
        }
    }
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    family: FamilyOpts,
    /// Comma-separated loss values, one scan per value.
    #[arg(long, value_delimiter = ',', conflicts_with = "eta")]
    loss: Option<Vec<f64>>,
    /// Comma-separated transmissivities, one scan per value.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Largest separation along the x1 axis.
    #[arg(long, default_value_t = 3.0)]
    range: f64,
    /// Number of scan points from 0 to the range.
    #[arg(long, default_value_t = 301)]
    steps: usize,
    /// Output base path; files get _loss<v>.csv / _eta<v>.csv and
    /// _summary.json suffixes.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Restrict the sweep to one family (default: all four).
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Squeezing parameter for the squeezed family (default 1).
    #[arg(long)]
    r: Option<f64>,
    /// Mean photon number for the thermal family (default 0.5).
    #[arg(long)]
    nbar: Option<f64>,
    /// Comma-separated loss values for the sweep.
    #[arg(long, value_delimiter = ',', conflicts_with = "eta")]
    loss: Option<Vec<f64>>,
    /// Comma-separated transmissivities (default 0,0.2,0.5,0.8,1).
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Largest separation per axis in the comparison grid.
    #[arg(long, default_value_t = 2.0)]
    range: f64,
    /// Grid points per separation axis.
    #[arg(long, default_value_t = 21)]
    steps: usize,
    /// Largest allowed absolute deviation before the sweep fails.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Ceiling for the numeric oracle's basis size.
    #[arg(long, default_value_t = 256)]
    cutoff_limit: usize,
    /// Seed for the randomized placement of each compared pair.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GramArgs {
    #[command(flatten)]
    family: FamilyOpts,
    #[command(flatten)]
    channel: ChannelOpt,
    /// Dataset CSV; a trailing label column is tolerated and ignored.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    family: FamilyOpts,
    #[command(flatten)]
    channel: ChannelOpt,
    /// Training CSV with a label column.
    #[arg(long)]
    data: PathBuf,
    /// Ridge weight, nonnegative.
    #[arg(long)]
    lambda: f64,
    /// Model file path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by fit.
    #[arg(long)]
    data: PathBuf,
    /// Query CSV; with a label column a held-out error report is
    /// written next to the predictions.
    #[arg(long)]
    query: PathBuf,
    /// Predictions path (stdout when omitted; a labeled query then
    /// sends the report to stderr instead of a _report.json file).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GeometryArgs {
    #[command(flatten)]
    family: FamilyOpts,
    #[command(flatten)]
    channel: ChannelOpt,
    /// Dataset CSV; a trailing label column is tolerated and ignored.
    #[arg(long)]
    data: PathBuf,
    /// json writes the report, csv the squared-distance matrix.
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failures ranked by exit code; library errors are translated once,
/// here, so every command reports consistently.
#[derive(Debug)]
enum CliError {
    /// Exit 1: a verification or tolerance gate failed.
    Tolerance(String),
    /// Exit 2: the request itself is invalid.
    Usage(String),
    /// Exit 3: input data is unreadable, malformed, or unsolvable.
    Data(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Tolerance(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Tolerance(m) | CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

impl From<cvkernels::Error> for CliError {
    fn from(err: cvkernels::Error) -> Self {
        use cvkernels::Error as E;
        let text = err.to_string();
        match err {
            E::InvalidParameter { .. } | E::DimensionMismatch(_) | E::Unsupported(_)
            | E::Empty(_) => CliError::Usage(text),
            E::Data(_) | E::NotPsd(_) | E::InvalidState(_) | E::GridTooSmall(_)
            | E::SingularSystem(_) => CliError::Data(text),
            E::CutoffExceeded { .. } => CliError::Tolerance(text),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Data(format!("model file is not valid JSON: {err}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Witness(args) => commands::witness(args),
        Command::Verify(args) => commands::verify(args),
        Command::Gram(args) => commands::gram_cmd(args),
        Command::Fit(args) => commands::fit(args),
        Command::Predict(args) => commands::predict(args),
        Command::Geometry(args) => commands::geometry(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}
