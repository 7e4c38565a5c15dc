use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Debug, Parser)]
#[command(
    name = "fairssat",
    version,
    about = "Group-fairness verification of classifiers through SSAT"
)]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute PPVs, the most and least favored groups and fairness metrics.
    Verify(VerifyArgs),
    /// Solve an SDIMACS file and print its probability and witness.
    Solve { path: PathBuf },
    /// Print the CNF encodings of a model with the feature legend.
    Encode(EncodeArgs),
    /// Rows needed for the estimated metrics to be accurate (order of magnitude).
    Samplesize {
        /// Protected Boolean variables.
        #[arg(long)]
        n: u64,
        /// Non-protected Boolean variables.
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 1.1)]
        epsilon0: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Write a seeded synthetic dataset with its schema and a tree model.
    Synth(SynthArgs),
}

#[derive(Debug, clap::Args)]
struct InputArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Equal-width bins for numeric attributes the model does not threshold.
    #[arg(long)]
    bins: Option<usize>,
    /// Integer scale of quantized linear weights.
    #[arg(long, default_value_t = fairssat::encoders::DEFAULT_SCALE)]
    scale: u32,
    /// Linear weights with magnitude at most this are dropped.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
}

#[derive(Debug, clap::Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Enum)]
    mode: ModeArg,
    /// Comma-separated subset of di,sp,eo.
    #[arg(long, default_value = "di,sp,eo")]
    metrics: String,
    /// Constrain nested thresholds of one attribute to be consistent.
    #[arg(long)]
    bin_implications: bool,
    /// Worker threads for per-group solving; 1 solves sequentially.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall time in the report.
    #[arg(long)]
    timings: bool,
    #[arg(long, default_value_t = 1.1)]
    epsilon0: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Enum,
    Learn,
    Both,
}

#[derive(Debug, clap::Args)]
struct EncodeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Dataset {
    FitnessIncome,
    AdultLike,
}

#[derive(Debug, clap::Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value_t = Dataset::FitnessIncome)]
    dataset: Dataset,
    #[arg(long, default_value_t = 10_000)]
    rows: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "error",
        1 => "warn",
        2 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
