//! `neurocollide`: dataset generation, training, evaluation and latency
//! benchmarks for learned self-collision checking.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or input error.

mod commands;
mod failure;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use failure::{Failure, EXIT_USAGE};
use neurocollide::nn::PRESET_NAMES;

#[derive(Debug, Parser)]
#[command(name = "neurocollide", version, about = "Learned robot self-collision checking")]
struct Cli {
    /// Worker threads (default: all cores; 1 for `bench`).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a balanced, split dataset.
    GenData(GenDataArgs),
    /// Train one network on a dataset's train split.
    Train(TrainArgs),
    /// Confusion counts of a model on every split of a dataset.
    Eval(EvalArgs),
    /// Mean test accuracy per encoding level.
    Sweep(SweepArgs),
    /// Prediction raster over two joints against the oracle.
    Slice(SliceArgs),
    /// Per-query latency of the oracle and networks.
    Bench(BenchArgs),
    /// Train/test accuracy gap against dataset size.
    GapStudy(GapStudyArgs),
    /// Write the built-in desk arm as a robot description.
    ExportRobot(ExportRobotArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Robot description JSON.
    #[arg(long)]
    pub robot: Option<PathBuf>,
    /// The six-disc region in the unit square.
    #[arg(long)]
    pub synthetic2d: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainingArgs {
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 256)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = 25_000)]
    pub n_per_class: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset CSV; the sidecar goes to `<out>.meta.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_parser = PossibleValuesParser::new(PRESET_NAMES))]
    pub arch: String,
    /// Encoding level (0 = raw angles).
    #[arg(long = "L", default_value_t = 0)]
    pub level: u32,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Model file; the loss curve goes to `<out>.curve.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// JSON report; printed only when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const BASELINES: [&str; 3] = ["knn", "gnb", "lda"];

fn arch_or_baseline() -> PossibleValuesParser {
    PossibleValuesParser::new(PRESET_NAMES.iter().chain(&BASELINES).copied())
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Network preset, or `knn`, `gnb`, `lda`.
    #[arg(long, value_parser = arch_or_baseline())]
    pub arch: String,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long = "L-list", value_delimiter = ',', default_value = "0,1,2,3")]
    pub levels: Vec<u32>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Trial `t` trains with `seed + t`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for per-level loss curves (`L<n>.csv`).
    #[arg(long)]
    pub curves_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SliceArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub robot: PathBuf,
    /// Two 1-based joint numbers.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "2,3")]
    pub joints: Vec<usize>,
    /// Angles of every joint (default all zero); the sliced ones are ignored.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub fixed: Option<Vec<f64>>,
    #[arg(long, default_value_t = neurocollide::eval::DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// PPM image; the category grid goes to `<out>.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    /// `oracle`, model files, or `PRESET@L` for an untrained network.
    #[arg(long, value_delimiter = ',', required = true)]
    pub models: Vec<String>,
    #[arg(long)]
    pub robot: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub queries: usize,
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub batch_sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    /// Seeds the queries and untrained weights.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GapStudyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_parser = PossibleValuesParser::new(PRESET_NAMES), default_value = "MLP1")]
    pub arch: String,
    #[arg(long = "L", default_value_t = 1)]
    pub level: u32,
    /// Total rows per dataset, ascending.
    #[arg(long, value_delimiter = ',', default_value = "10000,100000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Trial `t` samples and trains with `seed + t`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportRobotArgs {
    /// Directory receiving `desk-arm.json` and one OBJ per link.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

fn install_threads(threads: Option<usize>, default_one: bool) -> Result<(), Failure> {
    let n = match threads {
        Some(0) => return Err(Failure::input("--threads must be positive")),
        Some(n) => n,
        None if default_one => 1,
        None => return Ok(()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::runtime(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli, argv: Vec<String>) -> Result<(), Failure> {
    if let Command::Replay(args) = &cli.command {
        let argv = commands::replay_argv(&args.manifest)?;
        let mut full = vec!["neurocollide".to_string()];
        full.extend(argv.iter().cloned());
        let inner = Cli::try_parse_from(full).map_err(|e| Failure::input(format!("manifest arguments: {e}")))?;
        if matches!(inner.command, Command::Replay(_)) {
            return Err(Failure::input("a manifest cannot replay another replay"));
        }
        return dispatch(inner, argv);
    }
    install_threads(cli.threads, matches!(cli.command, Command::Bench(_)))?;
    let mut outputs = manifest::Outputs::default();
    let result = match &cli.command {
        Command::GenData(a) => commands::gen_data(a, &argv, &mut outputs),
        Command::Train(a) => commands::train(a, &argv, &mut outputs),
        Command::Eval(a) => commands::eval(a, &argv, &mut outputs),
        Command::Sweep(a) => commands::sweep(a, &argv, &mut outputs),
        Command::Slice(a) => commands::slice(a, &argv, &mut outputs),
        Command::Bench(a) => commands::bench(a, &argv, &mut outputs),
        Command::GapStudy(a) => commands::gap_study(a, &argv, &mut outputs),
        Command::ExportRobot(a) => commands::export_robot(a, &argv, &mut outputs),
        Command::Replay(_) => unreachable!("handled above"),
    };
    if result.is_err() {
        outputs.remove_all();
    }
    result
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match dispatch(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
