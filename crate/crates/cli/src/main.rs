//! Command line front end for channel assignment experiments.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "qom",
    version,
    about = "Sniffer channel assignment for passive monitoring"
)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file; standard output when omitted.
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a deployment scenario.
    Gen(GenArgs),
    /// Sample activity and sniffer traces from a graph or scenario.
    Sample(SampleArgs),
    /// Compute a channel assignment.
    Solve(SolveArgs),
    /// Infer coverage structure and probabilities from sniffer traces.
    Infer(InferArgs),
    /// Compare an inferred model against the true graph.
    Score(ScoreArgs),
    /// Evaluate the QoM of an assignment.
    Eval(EvalArgs),
    /// Run a batch experiment.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    HexPaper,
    HexReduced,
    Random,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "hex-paper")]
    pub preset: Preset,
    #[arg(long, default_value_t = 3)]
    pub channels: usize,
    /// User count; defaults to the preset's.
    #[arg(long)]
    pub users: Option<usize>,
    /// Sniffer count for the random preset.
    #[arg(long, default_value_t = 10)]
    pub sniffers: usize,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Coverage graph or scenario JSON.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub slots: usize,
    /// At most one active user per channel and coverage column per slot.
    #[arg(long)]
    pub exclusive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolveAlgo {
    Greedy,
    Max,
    LpRound,
    Brute,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub algo: SolveAlgo,
    #[arg(long)]
    pub graph: PathBuf,
    /// Roundings tried by lp-round.
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    /// Sniffer traces for max; busy probabilities come from the graph otherwise.
    #[arg(long)]
    pub traces: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InferScheme {
    KnownG,
    Bica,
    Qlica,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    #[arg(long, value_enum)]
    pub scheme: InferScheme,
    #[arg(long)]
    pub traces: PathBuf,
    /// True graph, required by known-g.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Restrict to one channel.
    #[arg(long)]
    pub channel: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// FastICA starts per mode for qlica.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Sniffer cap for bica.
    #[arg(long, default_value_t = 16)]
    pub max_sniffers: usize,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub inferred: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Comma separated channels (`1,2`) or a JSON file with an assignment.
    #[arg(long)]
    pub assignment: String,
    /// User activity traces for an empirical QoM as well.
    #[arg(long)]
    pub traces: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ExperimentCommand {
    /// QoM of every algorithm under each scheme over a channel sweep.
    Qom(QomExperimentArgs),
    /// Inference accuracy of bica and qlica over a user count sweep.
    Accuracy(AccuracyExperimentArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExperimentPreset {
    Reduced,
    Paper,
}

#[derive(Args, Debug)]
pub struct QomExperimentArgs {
    #[arg(long, value_enum, default_value = "reduced")]
    pub preset: ExperimentPreset,
    #[arg(long, value_delimiter = ',', default_values_t = [3, 6, 9])]
    pub channels: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values = ["user-centric", "qlica", "bica"])]
    pub schemes: Vec<String>,
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    #[arg(long, default_value_t = 10_000)]
    pub slots: usize,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
}

#[derive(Args, Debug)]
pub struct AccuracyExperimentArgs {
    #[arg(long, value_delimiter = ',', default_values_t = 5..=20)]
    pub users: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub sniffers: usize,
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    #[arg(long, default_value_t = 10_000)]
    pub slots: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
