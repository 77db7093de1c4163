use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;

use config::Method;

#[derive(Parser)]
#[command(name = "bprm", version, about = "Bayesian profile regression for censored survival data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a simulation scenario dataset and its ground truth.
    Simulate(SimulateArgs),
    /// Run the sampler, with or without tempering.
    Fit(FitArgs),
    /// Select a point estimate of the partition from stored draws.
    Postprocess(PostprocessArgs),
    /// Misclassification, bias and cluster counts against ground truth.
    Evaluate(EvaluateArgs),
    /// Convergence statistics across runs and exchange rates.
    Diagnose(DiagnoseArgs),
    /// Per-cluster posterior summaries and heatmap codes.
    Report(ReportArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = ["S1", "S2", "S3", "S4"])]
    pub scenario: String,
    /// Individuals per cluster.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Run configuration; only the censoring settings are used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated temperatures starting at 1.
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<f64>>,
    /// Iterations between exchange proposals.
    #[arg(long)]
    pub npt: Option<usize>,
    /// Sampling iterations after burn-in.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub adaptive_blocks: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    /// Run the cold chain alone.
    #[arg(long)]
    pub no_pt: bool,
    /// Comma-separated initial concentrations, one chain each.
    #[arg(long, value_delimiter = ',')]
    pub alpha_init: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PostprocessArgs {
    /// Draws file, or a fit output directory.
    #[arg(long)]
    pub draws: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Use every n-th draw when computing expected VI.
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Directories holding `draws.jsonl` and `partition.json`.
    #[arg(long, num_args = 1.., required = true)]
    pub runs: Vec<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct DiagnoseArgs {
    /// Fit output directories.
    #[arg(long, num_args = 1.., required = true)]
    pub runs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub draws: PathBuf,
    /// JSON array of labels, as written by `postprocess`.
    #[arg(long)]
    pub partition: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Fit(a) => commands::fit(a),
        Command::Postprocess(a) => commands::postprocess(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Diagnose(a) => commands::diagnose(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
