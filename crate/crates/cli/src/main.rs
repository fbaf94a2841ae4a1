//! metasir: meta-distribution, rate-control, and throughput computations for
//! Poisson bipolar networks, with seeded Monte Carlo validation.
//!
//! Exit codes: 0 success, 1 usage/validation error, 2 numerical failure,
//! 3 I/O error.

// `!(x > y)` guards double as NaN rejection, same as in the core crate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{FileConfig, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    #[value(name = "gilpelaez")]
    GilPelaez,
    #[value(name = "binomial")]
    Binomial,
    #[value(name = "mc")]
    Mc,
    #[value(name = "ultrarel")]
    Ultrarel,
    #[value(name = "partial")]
    Partial,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::GilPelaez => "gilpelaez",
            Method::Binomial => "binomial",
            Method::Mc => "mc",
            Method::Ultrarel => "ultrarel",
            Method::Partial => "partial",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "gilpelaez" => Ok(Method::GilPelaez),
            "binomial" => Ok(Method::Binomial),
            "mc" => Ok(Method::Mc),
            "ultrarel" => Ok(Method::Ultrarel),
            "partial" => Ok(Method::Partial),
            other => Err(CliError::usage(format!(
                "method must be gilpelaez|binomial|mc|ultrarel|partial, got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Flags shared by every subcommand; command-line values override config-file
/// values, which override documented defaults.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Transmitter density (per unit area)
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Path-loss exponent (> 2)
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Link distance
    #[arg(long = "R")]
    pub link_distance: Option<f64>,

    /// Target reliability nu in (0, 1)
    #[arg(long, conflicts_with = "eps")]
    pub nu: Option<f64>,

    /// Target outage eps = 1 - nu in (0, 1)
    #[arg(long)]
    pub eps: Option<f64>,

    /// SIR threshold (linear)
    #[arg(long, conflicts_with = "theta_db")]
    pub theta: Option<f64>,

    /// SIR threshold in dB (converted as 10^(dB/10))
    #[arg(long)]
    pub theta_db: Option<f64>,

    /// Monte Carlo realization count
    #[arg(long)]
    pub samples: Option<usize>,

    /// Master seed for the counter-based streams
    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads (defaults to all cores)
    #[arg(long, env = "METASIR_WORKERS")]
    pub workers: Option<usize>,

    /// Window truncation tolerance (relative truncated mean interference)
    #[arg(long)]
    pub tol: Option<f64>,

    /// Computation method where several apply
    #[arg(long, value_enum)]
    pub method: Option<Method>,

    /// Reliability grid start:stop:count:{linear|log}
    #[arg(long = "x-grid")]
    pub x_grid: Option<String>,

    /// Threshold grid start:stop:count:{linear|log}
    #[arg(long = "t-grid")]
    pub t_grid: Option<String>,

    /// Deterministic-threshold grid start:stop:count:{linear|log}
    #[arg(long = "theta-grid")]
    pub theta_grid: Option<String>,

    /// Nearest-interferer counts (comma separated)
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,

    /// Moment count for the binomial-mixtures method (default 20, max 30)
    #[arg(long)]
    pub moments: Option<usize>,

    /// Densities for fig2 (comma separated; default 0.25,1)
    #[arg(long, value_delimiter = ',')]
    pub densities: Vec<f64>,

    /// Rectangle window WIDTHxHEIGHT for the realization report
    #[arg(long)]
    pub window: Option<String>,

    /// JSON config file (strict schema; flags override file values)
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Output path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Parser)]
#[command(
    name = "metasir",
    version,
    about = "SIR meta distribution, rate-control threshold distribution, and throughput densities for Poisson bipolar networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Meta distribution of the SIR at a fixed threshold over a reliability grid
    Md(CommonArgs),
    /// ccdf of the rate-control SIR threshold at a fixed target reliability
    Tdist(CommonArgs),
    /// Throughput densities (rate control and deterministic threshold)
    Throughput(CommonArgs),
    /// Empirical ccdf of the interference without fading (Levy comparison at alpha = 4)
    Interference(CommonArgs),
    /// All-links realization report with per-link reliability and threshold
    Realization(CommonArgs),
    /// Accuracy-of-the-bound curves per density (exact, k-nearest, partial info)
    Fig2(CommonArgs),
    /// Throughput-density curves at the reference operating point
    Fig3(CommonArgs),
    /// Validation suites (duality, psuccess, md, binomial, bound, ultrarel,
    /// partialinfo, levy, throughput, repro, all)
    Validate {
        /// Which suite to run
        #[arg(long)]
        suite: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// CLI-level error carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        Self { message, code: 1 }
    }

    pub fn numerical(message: String) -> Self {
        Self { message, code: 2 }
    }

    pub fn io(message: String) -> Self {
        Self { message, code: 3 }
    }
}

impl From<metasir::Error> for CliError {
    fn from(e: metasir::Error) -> Self {
        use metasir::Error::*;
        let code = match e {
            Pole { .. } | QuadratureFailure { .. } | CancellationError { .. }
            | AccuracyLoss { .. } => 2,
            InvalidParameter(_) | EmptyRealization | InsufficientInterferers { .. }
            | ZeroInterference | UnsupportedExponent { .. } => 1,
        };
        Self { message: e.to_string(), code }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors; everything else is a usage error
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let (common, suite) = match &cli.command {
        Command::Md(c)
        | Command::Tdist(c)
        | Command::Throughput(c)
        | Command::Interference(c)
        | Command::Realization(c)
        | Command::Fig2(c)
        | Command::Fig3(c) => (c, None),
        Command::Validate { suite, common } => (common, Some(suite.clone())),
    };

    let file = match &common.config {
        Some(path) => config::load_file(path)?,
        None => FileConfig::default(),
    };
    let settings = Settings::merge(common, &file)?;

    let (manifest, table, code) = match (&cli.command, suite) {
        (Command::Md(_), _) => {
            let (m, t) = commands::run_md(&settings)?;
            (m, t, 0u8)
        }
        (Command::Tdist(_), _) => {
            let (m, t) = commands::run_tdist(&settings)?;
            (m, t, 0)
        }
        (Command::Throughput(_), _) => {
            let (m, t) = commands::run_throughput(&settings)?;
            (m, t, 0)
        }
        (Command::Interference(_), _) => {
            let (m, t) = commands::run_interference(&settings)?;
            (m, t, 0)
        }
        (Command::Realization(_), _) => {
            let (m, t) = commands::run_realization(&settings)?;
            (m, t, 0)
        }
        (Command::Fig2(_), _) => {
            let (m, t) = commands::run_fig2(&settings)?;
            (m, t, 0)
        }
        (Command::Fig3(_), _) => {
            let (m, t) = commands::run_fig3(&settings)?;
            (m, t, 0)
        }
        (Command::Validate { .. }, Some(suite)) => {
            let (m, t, all_pass) = commands::run_validate(&settings, &suite)?;
            (m, t, if all_pass { 0 } else { 2 })
        }
        (Command::Validate { .. }, None) => unreachable!(),
    };

    // run manifest to stderr, including execution hints kept out of the
    // embedded copy
    let extra = vec![(
        "workers".to_string(),
        settings
            .workers
            .map_or_else(|| "auto".to_string(), |w| w.to_string()),
    )];
    manifest.eprint(&extra);

    table::emit(&manifest, &table, settings.format, settings.out.as_deref())
        .map_err(|e| CliError::io(format!("write failed: {e}")))?;
    Ok(ExitCode::from(code))
}
