//! `fracount`: command-line tables for the fractional counting process.

mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable naming the directory for output files when
/// `--output` is not given.
pub const OUT_DIR_ENV: &str = "FRACOUNT_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "fracount", version, about = "Tables and checks for the fractional non-homogeneous counting process")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    /// Output file; defaults to $FRACOUNT_OUT_DIR/<command>.<format> when
    /// that variable is set, else standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(flatten)]
    tolerances: ToleranceArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Overrides for the series evaluation limits.
#[derive(Args, Debug, Clone)]
pub struct ToleranceArgs {
    /// Relative accuracy target of series evaluations.
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Maximum number of series terms.
    #[arg(long, global = true)]
    max_terms: Option<usize>,
    /// Ceiling for extended-precision retries, in bits (0 disables them).
    #[arg(long, global = true)]
    max_precision_bits: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct ProcessArgs {
    /// Memory exponent, 0 < mu <= 1.
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    /// Inhomogeneity exponent, -mu < beta <= 1 - mu.
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    /// Rate lambda > 0.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    rate: f64,
}

/// Either a single time or an evenly spaced grid.
#[derive(Args, Debug, Clone)]
pub struct TimeArgs {
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["time_start", "time_stop", "time_steps"])]
    time: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["time_stop", "time_steps"])]
    time_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["time_start", "time_steps"])]
    time_stop: Option<f64>,
    /// Number of grid points, endpoints included.
    #[arg(long, requires_all = ["time_start", "time_stop"])]
    time_steps: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Probabilities P(n, t) with the tail mass beyond the table.
    Pmf {
        #[command(flatten)]
        process: ProcessArgs,
        #[command(flatten)]
        time: TimeArgs,
        /// Largest n; when omitted the table grows until the terms are negligible.
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Mean, variance, skewness, excess kurtosis and raw/central moments.
    Moments {
        #[command(flatten)]
        process: ProcessArgs,
        #[command(flatten)]
        time: TimeArgs,
    },
    /// Interarrival density and survival function, or its Laplace transform.
    Interarrival {
        #[command(flatten)]
        process: ProcessArgs,
        #[command(flatten)]
        time: TimeArgs,
        /// Laplace variables u; when given, the transform is tabulated instead.
        #[arg(long, value_delimiter = ',')]
        laplace: Vec<f64>,
        /// Term limit for the large-u series.
        #[arg(long, default_value_t = 200)]
        laplace_terms: usize,
    },
    /// Fractional Bell polynomials B(x, m) for m = 0..=max.
    Bell {
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long)]
        max: usize,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        x: f64,
    },
    /// Triangle of Stirling or fractional combinatorial numbers.
    Stirling {
        #[arg(long, value_enum)]
        kind: StirlingKind,
        #[arg(long)]
        max: usize,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        beta: f64,
    },
    /// Monte Carlo draws with a summary or the raw samples.
    Simulate {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long, value_enum, default_value_t = SimKind::Count)]
        kind: SimKind,
        /// Observation time (path horizon for `--kind path`).
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        time: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// chacha8, chacha12 or chacha20.
        #[arg(long, default_value = "chacha20")]
        rng: String,
        /// Jump law for compound sums: degenerate:V, exp:RATE or normal:MEAN:SD.
        #[arg(long, default_value = "degenerate:1")]
        jump: String,
        #[arg(long, value_enum, default_value_t = Emit::Summary)]
        emit: Emit,
    },
    /// Run the self-verification suite; exits with 1 if any property fails.
    Verify {
        #[arg(long, value_enum, default_value_t = Grid::Default)]
        grid: Grid,
        /// First-arrival draws per grid point.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Fixed-time count draws per grid point and time.
        #[arg(long, default_value_t = 1_000_000)]
        count_samples: usize,
        /// Draws per compound-sum case.
        #[arg(long, default_value_t = 200_000)]
        compound_samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Run only these properties (1-10); repeatable.
        #[arg(long)]
        property: Vec<usize>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StirlingKind {
    /// Signed Stirling numbers of the first kind.
    First,
    /// Stirling numbers of the second kind.
    Second,
    /// Fractional combinatorial numbers S(m, l) for the given (mu, beta).
    Frac,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    Count,
    FirstArrival,
    Compound,
    /// Number of events up to the horizon along simulated paths.
    Path,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Summary,
    Samples,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    Default,
    Small,
}

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or violated parameter constraints (exit 2).
    Usage(String),
    /// Numerical failure (exit 3).
    Numeric(String),
    /// Output could not be written (exit 1).
    Io(String),
    /// Verification ran and at least one property failed (exit 1).
    VerifyFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) | CliError::VerifyFailed => 1,
        }
    }
}

impl From<fracount::Error> for CliError {
    fn from(e: fracount::Error) -> Self {
        if e.is_argument_error() || matches!(e, fracount::Error::Domain(_)) {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn destination(cli: &Cli, command: &str) -> Option<PathBuf> {
    cli.output.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{command}.{}", cli.format.extension())))
    })
}

fn emit(cli: &Cli, report: &output::Report) -> Result<(), CliError> {
    let write = |out: &mut dyn Write| match cli.format {
        Format::Csv => report.write_csv(out),
        Format::Json => report.write_json(out),
    };
    match destination(cli, report.command) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            let mut file = BufWriter::new(File::create(&path)?);
            write(&mut file)?;
            file.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            write(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = commands::series_config(&cli.tolerances)?;
    let (report, verdict) = commands::dispatch(&cli.command, &cfg)?;
    emit(cli, &report)?;
    verdict
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Numeric(m) => eprintln!("numerical error: {m}"),
                CliError::Io(m) => eprintln!("output error: {m}"),
                CliError::VerifyFailed => eprintln!("verification failed"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
