//! `furstenberg`: reproducible experiments on random SL2(R) products.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 on numerical failure.

mod commands;
mod output;
mod report;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use furstenberg_core::Error;

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "furstenberg", version, about = "Random SL2(R) products and their stationary measures")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Measure document `{"atoms":[{"m":[a,b,c,d],"w":..},..]}`; the
    /// built-in reference measure when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Number of trajectories or stationary samples.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Transfer operator grid size.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Output file; `<table>.<format>` in the working directory when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Lyapunov exponent to use instead of estimating it.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a measure document and print its moments and probe verdict.
    Validate {
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Lyapunov exponent and variance from `log |S_n|`.
    Lyapunov {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
    /// Large-deviation exceedance fractions.
    Ldp {
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80")]
        n: Vec<usize>,
    },
    /// Leading eigenvalue of the perturbed operator near zero.
    Spectrum {
        #[arg(long, default_value_t = 0.5)]
        xi_max: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
    },
    /// Decay of `P^n cos` toward its stationary mean.
    Equidist {
        #[arg(long, default_value_t = 40)]
        n_max: usize,
    },
    /// Renewal sum against its limit.
    Renewal {
        /// One of R, L, E, E1+, E1-, E2+, E2-.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        t: f64,
        /// Half-width of the window for L.
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        /// Chart coordinate of the start point.
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
    },
    /// Empirical Fourier coefficients of the stationary measure.
    Fourier {
        #[arg(long, default_value_t = 64)]
        kmax: usize,
        #[arg(long, default_value_t = 300)]
        burn_in: usize,
    },
    /// Both sides of the crossing decomposition of the stationary measure.
    Decomp {
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 300)]
        burn_in: usize,
    },
    /// Phase comparison on crossing words.
    Gammalambda {
        #[arg(long, value_delimiter = ',', default_value = "3,6,20,30")]
        s: Vec<f64>,
        #[arg(long, default_value_t = 40.0)]
        t: f64,
    },
    /// Largest ball masses of the stationary measure.
    Regularity {
        /// Radii `e^{-j}` for the listed `j`.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8")]
        log_r: Vec<f64>,
        #[arg(long, default_value_t = 4096)]
        centers: usize,
    },
    /// Exact identities across all modules.
    Selftest,
    /// Merge output tables into one JSON summary with acceptance flags.
    Report {
        /// Files, or directories whose `.csv` files are read.
        paths: Vec<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(String),
    Schema(String),
    Failed(String),
}

impl CliError {
    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::NoConvergence(_) | Error::TruncationDominated { .. }) => 3,
            CliError::Failed(_) => 3,
            _ => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "invalid argument: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::Schema(m) => write!(f, "schema mismatch: {m}"),
            CliError::Failed(m) => write!(f, "check failed: {m}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let c = &cli.common;
    let (table, summary) = match cli.command {
        Command::Validate { depth } => commands::validate(c, depth)?,
        Command::Lyapunov { n } => commands::lyapunov(c, n)?,
        Command::Ldp { epsilon, n } => commands::ldp(c, epsilon, &n)?,
        Command::Spectrum { xi_max, points } => commands::spectrum(c, xi_max, points)?,
        Command::Equidist { n_max } => commands::equidist(c, n_max)?,
        Command::Renewal { kind, t, b, theta } => commands::renewal(c, &kind, t, b, theta)?,
        Command::Fourier { kmax, burn_in } => commands::fourier(c, kmax, burn_in)?,
        Command::Decomp { t, burn_in } => commands::decomp(c, t, burn_in)?,
        Command::Gammalambda { s, t } => commands::gammalambda(c, &s, t)?,
        Command::Regularity { log_r, centers } => commands::regularity(c, &log_r, centers)?,
        Command::Selftest => selftest::run()?,
        Command::Report { paths } => {
            let out = c.out.clone().unwrap_or_else(|| PathBuf::from("report.json"));
            let n = report::run(&paths, &out)?;
            println!("report: {n} sections -> {}", out.display());
            return Ok(());
        }
    };
    let out = c
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.{}", table.name, c.format.extension())));
    output::write(&table, c.format, c.seed, &out)?;
    println!("{summary}");
    if let Some(fail) = summary.strip_prefix("FAIL ") {
        return Err(CliError::Failed(fail.to_string()));
    }
    Ok(())
}

fn main() -> ExitCode {
    furstenberg_core::mc::init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
