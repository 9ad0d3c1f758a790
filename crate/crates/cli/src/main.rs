use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdrank::{Error, ErrorClass};

mod commands;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  validation error (bad flag or parameter value)
  3  data integrity error (malformed CSV, tie score, missing/duplicate game_no, degenerate season)
  4  numeric error (undefined correlation, divergence, non-finite values, singular system)
  5  I/O error";

/// Weighted point-differential indicators: sweeps, weight fitting, and the summary table.
#[derive(Debug, Parser)]
#[command(name = "pdrank", version, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a games CSV and summarize its team-seasons.
    IngestCheck {
        #[command(flatten)]
        io: InputOutput,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Correlation of capped point differential over a range of integer caps.
    SweepCap {
        #[command(flatten)]
        io: InputOutput,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        cap_min: i64,
        #[arg(long, default_value_t = 40, allow_negative_numbers = true)]
        cap_max: i64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Correlation of a soft-cap weighting over a grid of scale factors D.
    SweepSoft {
        #[command(flatten)]
        io: InputOutput,
        /// Soft-cap family.
        #[arg(long = "fn", value_enum)]
        kind: SoftCapArg,
        #[command(flatten)]
        grid: DGrid,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Correlation of Pythagorean winning percentage over a grid of exponents.
    SweepPyth {
        #[command(flatten)]
        io: InputOutput,
        #[command(flatten)]
        grid: ExpGrid,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Fit per-margin weights (-40..+40) by ridge-regularized gradient descent.
    ///
    /// The reported correlation is in-sample (measured on the training data).
    FitWeights {
        #[command(flatten)]
        io: InputOutput,
        /// Ridge penalty.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        lambda: f64,
        /// Learning rate; defaults to 1 / (2 (trace(X^T X) + lambda * 81)).
        #[arg(long, allow_negative_numbers = true)]
        lr: Option<f64>,
        /// Maximum gradient-descent iterations.
        #[arg(long, default_value_t = 50_000)]
        iterations: usize,
        /// Record the training correlation every this many iterations.
        #[arg(long, default_value_t = 100)]
        trace_every: usize,
        /// Games with |margin| > 40: count in the edge bin (clamp) or ignore (drop).
        #[arg(long, value_enum, default_value_t = OobArg::Clamp)]
        oob: OobArg,
        /// Also write the weights as `margin,weight` CSV.
        #[arg(long)]
        weights_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Summary table: each indicator family at its best parameter.
    Table1 {
        #[command(flatten)]
        io: InputOutput,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        cap_min: i64,
        #[arg(long, default_value_t = 40, allow_negative_numbers = true)]
        cap_max: i64,
        #[command(flatten)]
        d_grid: DGrid,
        #[command(flatten)]
        exp_grid: ExpGrid,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Per-team-season values of one indicator as `season,team,value` CSV.
    Indicator {
        #[command(flatten)]
        io: InputOutput,
        #[arg(long, value_enum)]
        kind: IndicatorKind,
        /// Cap for `--kind cap`.
        #[arg(long, allow_negative_numbers = true)]
        cap: Option<i64>,
        /// Scale factor for `--kind tanh|erf|exp`.
        #[arg(long, allow_negative_numbers = true)]
        d: Option<f64>,
        /// Exponent for `--kind pyth`.
        #[arg(long, allow_negative_numbers = true)]
        exp: Option<f64>,
        /// Weights CSV for `--kind lookup`.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Generate a deterministic synthetic games CSV.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        teams: usize,
        #[arg(long, default_value_t = 82)]
        games: usize,
        #[arg(long, default_value_t = 20)]
        seasons: usize,
        /// Standard deviation of latent team strength (points).
        #[arg(long, default_value_t = 5.0)]
        spread: f64,
        /// Standard deviation of per-game margin noise (points).
        #[arg(long, default_value_t = 12.0)]
        noise: f64,
        #[arg(long, default_value_t = 1990)]
        first_season: i32,
        /// Output path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct InputOutput {
    /// Games CSV (`season,team,game_no,pts_for,pts_against` or the game-level layout).
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Output path (stdout if omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DGrid {
    /// Explicit comma-separated D values; overrides the min/max/step grid.
    #[arg(long, value_delimiter = ',')]
    d: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    d_min: f64,
    #[arg(long, default_value_t = 40.0)]
    d_max: f64,
    #[arg(long, default_value_t = 0.5)]
    d_step: f64,
}

#[derive(Debug, Args)]
struct ExpGrid {
    /// Explicit comma-separated exponents; overrides the min/max/step grid.
    #[arg(long, value_delimiter = ',')]
    exp: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    exp_min: f64,
    #[arg(long, default_value_t = 5.0)]
    exp_max: f64,
    #[arg(long, default_value_t = 0.05)]
    exp_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SoftCapArg {
    Tanh,
    Erf,
    Exp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OobArg {
    Clamp,
    Drop,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IndicatorKind {
    WinLoss,
    Pd,
    Cap,
    Tanh,
    Erf,
    Exp,
    Pyth,
    Lookup,
}

fn exit_code(err: &Error) -> u8 {
    match err.class() {
        ErrorClass::Validation => 2,
        ErrorClass::DataIntegrity => 3,
        ErrorClass::Numeric => 4,
        ErrorClass::Io => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("pdrank: error[{}]: {msg}", e.kind());
            ExitCode::from(exit_code(&e))
        }
    }
}

impl IndicatorKind {
    fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}
