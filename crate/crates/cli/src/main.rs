mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Shareholder control power: voting-game indices, evolution models, fits
/// and the firm-year pipeline.
#[derive(Debug, Parser)]
#[command(name = "ctrlpower", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shapley-Shubik index of a single game or of every firm in a registry.
    Spi(SpiArgs),
    /// Fibonacci ladder, collapse walks and wave evaluations as CSV.
    Evolve(EvolveArgs),
    /// First-order Fourier fit of a `t,y` CSV, printed as JSON.
    Fit(FitArgs),
    /// Write a synthetic registry CSV.
    Synth(SynthArgs),
    /// Run the full statistical pipeline and emit a report.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpiMethod {
    Dp,
    Subset,
    Oracle,
}

#[derive(Debug, Args)]
pub struct SpiArgs {
    /// Comma-separated player weights.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "input")]
    pub shares: Option<Vec<f64>>,
    /// Registry CSV; prints every firm's profile.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Residual share appended as one more player (negative values clip to 0).
    #[arg(long, allow_hyphen_values = true)]
    pub residual: Option<f64>,
    #[arg(long, value_enum, default_value = "dp")]
    pub method: SpiMethod,
    /// Players per registry game.
    #[arg(long = "spi-mode", default_value = "top10")]
    pub spi_mode: String,
    /// `text` or `json` for a single game.
    #[arg(long, default_value = "text")]
    pub format: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Abort on the first invalid registry row.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(subcommand)]
    pub what: EvolveCommand,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EvolveCommand {
    /// The first `k` ladder states.
    Ratios {
        #[arg(long)]
        k: usize,
        /// Print states as fractions.
        #[arg(long)]
        exact: bool,
    },
    /// Fibonacci vector after `n` iterations.
    Fib {
        #[arg(long)]
        n: u32,
    },
    /// A seeded collapse walk.
    Walk {
        #[arg(long)]
        ops: usize,
        #[arg(long)]
        seed: u64,
        /// `uniform`, `fixed:L` or `weighted:w1,w2,w3,w4`.
        #[arg(long, default_value = "uniform")]
        law: String,
        #[arg(long)]
        exact: bool,
    },
    /// Evaluate a wave on a time grid.
    Wave {
        /// `a0,a1,b1,T`; defaults to the reported fit.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "hypothesis")]
        params: Option<Vec<f64>>,
        /// Use the hypothesis wave for `--h`.
        #[arg(long)]
        hypothesis: bool,
        #[arg(long, default_value_t = 1.5)]
        h: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = 25.0, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Wave-equation residual over one period.
    Residual {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.5)]
        h: f64,
        /// Operation-time period; defaults to `T / h`.
        #[arg(long = "period-l")]
        period_l: Option<f64>,
        #[arg(long, default_value_t = 24)]
        points: usize,
    },
    /// Seeded draws from the control-power density at time `t`.
    Sample {
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with columns `t,y`.
    #[arg(long)]
    pub input: PathBuf,
    /// `lo,hi` in years.
    #[arg(long = "period-range")]
    pub period_range: Option<String>,
    #[arg(long = "grid-step", default_value_t = 0.05)]
    pub grid_step: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// All four groups at their published moments and sample sizes.
    Default,
    /// Control group with SPI draws following the hypothesis wave.
    Hypothesis,
    /// Control group with share means following the oscillation model.
    Oscillation,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "default")]
    pub preset: Preset,
    #[arg(long, default_value_t = 1.5)]
    pub h: f64,
    /// Registry CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write planted SPI draws as `group,year,spi`.
    #[arg(long)]
    pub outcomes: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Registry CSV.
    #[arg(long, required_unless_present = "synth", conflicts_with = "synth")]
    pub input: Option<PathBuf>,
    /// Generate the registry from a preset instead (needs `--seed`).
    #[arg(long, value_enum, requires = "seed")]
    pub synth: Option<Preset>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Planted SPI draws (`group,year,spi`) to use with `--input`.
    #[arg(long, requires = "input")]
    pub outcomes: Option<PathBuf>,
    /// Macro series as `name=path` (CSV `year,value`); repeatable.
    #[arg(long = "macro")]
    pub macros: Vec<String>,
    #[arg(long, default_value_t = 1.5)]
    pub h: f64,
    #[arg(long = "min-sample", default_value_t = 50)]
    pub min_sample: usize,
    #[arg(long = "period-range")]
    pub period_range: Option<String>,
    #[arg(long = "grid-step", default_value_t = 0.05)]
    pub grid_step: f64,
    #[arg(long = "spi-mode", default_value = "top10")]
    pub spi_mode: String,
    /// `json`, `csv-tables` or `plot-data`.
    #[arg(long, default_value = "json")]
    pub format: String,
    /// File for json (stdout when absent), directory for the CSV formats.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub strict: bool,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("usage error: {m}"),
                CliError::Data(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
