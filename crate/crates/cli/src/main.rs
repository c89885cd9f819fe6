//! `netmod`: fit calibration models, optimize interventions and simulate
//! network recovery from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use netmod_core::ergm::ErgmMode;
use netmod_core::intervene::Strategy;
use netmod_core::netcore::ChangeKind;

#[derive(Parser, Debug)]
#[command(name = "netmod", version, about = "Budgeted network interventions and ERGM recovery simulation")]
struct Cli {
    /// Worker threads; falls back to NETMOD_JOBS, then all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a dyadic quasi-Poisson model.
    FitDyadic(DyadicArgs),
    /// Fit a dyadic model and run the MRQAP double semi-partialling test.
    QapTest(QapArgs),
    /// Fit an ERGM by maximum pseudolikelihood.
    FitErgm(FitErgmArgs),
    /// Run Metropolis-Hastings sweeps from a starting network.
    Simulate(SimulateArgs),
    /// Choose a budgeted set of interventions minimizing a metric.
    Optimize(OptimizeArgs),
    /// Simulate metric trajectories under an ERGM.
    Evolve(EvolveArgs),
    /// Run a full configured pipeline.
    Pipeline(PipelineArgs),
    /// Check a pipeline configuration and its input files.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Clone)]
struct NetworkInput {
    /// Input file format: square-matrix-csv or edge-list-csv.
    #[arg(long, default_value = "square-matrix-csv")]
    format: String,
    /// Node list fixing label order for edge lists.
    #[arg(long)]
    nodes: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DyadicArgs {
    #[arg(long)]
    response: PathBuf,
    /// Comma-separated predictor networks.
    #[arg(long, value_delimiter = ',', required = true)]
    predictors: Vec<PathBuf>,
    /// Predictor names (default: file stems).
    #[arg(long, value_delimiter = ',')]
    names: Vec<String>,
    #[command(flatten)]
    input: NetworkInput,
    #[arg(long)]
    seed: Option<u64>,
    /// Output JSON (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct QapArgs {
    #[command(flatten)]
    dyadic: DyadicArgs,
    #[arg(long, default_value_t = 999)]
    permutations: usize,
}

#[derive(Args, Debug)]
struct FitErgmArgs {
    #[arg(long)]
    network: PathBuf,
    /// Comma-separated terms: edges, isolates, gwesp:A, edgecov:NAME,
    /// nonzero, sum, transitiveweights.
    #[arg(long, value_delimiter = ',', required = true)]
    statistics: Vec<String>,
    /// Covariate layer as NAME=PATH; repeatable.
    #[arg(long = "covariate")]
    covariates: Vec<String>,
    #[arg(long, value_parser = parse_mode, default_value = "binary")]
    mode: ErgmMode,
    #[arg(long)]
    max_weight: Option<u32>,
    #[command(flatten)]
    input: NetworkInput,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// ERGM JSON.
    #[arg(long)]
    model: PathBuf,
    /// Starting network.
    #[arg(long)]
    network: PathBuf,
    #[arg(long = "covariate")]
    covariates: Vec<String>,
    #[arg(long, default_value_t = 1)]
    sweeps: usize,
    #[command(flatten)]
    input: NetworkInput,
    #[arg(long)]
    seed: Option<u64>,
    /// Output square-matrix CSV (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct MetricArgs {
    /// total-weight, expected-dyad-sum or cosine-distance.
    #[arg(long)]
    metric: String,
    /// Dyadic model JSON for expected-dyad-sum.
    #[arg(long = "dyadic-model")]
    dyadic_model: Option<PathBuf>,
    /// Target network for cosine-distance.
    #[arg(long)]
    target: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    /// Focal network.
    #[arg(long)]
    network: PathBuf,
    /// Name of the focal layer, as used by dyadic-model predictors.
    #[arg(long, default_value = "focal")]
    focal_name: String,
    #[arg(long = "covariate")]
    covariates: Vec<String>,
    #[command(flatten)]
    metric: MetricArgs,
    #[arg(long, value_parser = parse_strategy, default_value = "greedy")]
    strategy: Strategy,
    #[arg(long)]
    budget: usize,
    #[arg(long, value_parser = parse_change, default_value = "remove-node-replace")]
    change: ChangeKind,
    #[arg(long, default_value_t = 1.0)]
    unit_size: f64,
    /// Draws for random-best.
    #[arg(long, default_value_t = 100)]
    draws: usize,
    /// Layer ranked by degree-heuristic (default: the focal layer).
    #[arg(long)]
    degree_network: Option<String>,
    #[arg(long, default_value_t = netmod_core::intervene::DEFAULT_EVALUATION_CAP)]
    exhaustive_cap: u64,
    #[command(flatten)]
    input: NetworkInput,
    #[arg(long)]
    seed: Option<u64>,
    /// Include wall-clock time in the report (makes output non-reproducible).
    #[arg(long)]
    record_time: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    /// ERGM JSON.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    network: PathBuf,
    #[arg(long, default_value = "focal")]
    focal_name: String,
    #[arg(long = "covariate")]
    covariates: Vec<String>,
    #[command(flatten)]
    metric: MetricArgs,
    /// Sweeps of social time to simulate.
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 100)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    /// Label written in the strategy column.
    #[arg(long, default_value = "observed")]
    label: String,
    #[command(flatten)]
    input: NetworkInput,
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectory CSV (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the summary JSON here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_mode(s: &str) -> Result<ErgmMode, String> {
    match s {
        "binary" => Ok(ErgmMode::Binary),
        "valued" => Ok(ErgmMode::Valued),
        other => Err(format!("unknown mode `{other}` (binary or valued)")),
    }
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: netmod_core::Error| e.to_string())
}

fn parse_change(s: &str) -> Result<ChangeKind, String> {
    s.parse().map_err(|e: netmod_core::Error| e.to_string())
}

fn init_threads(jobs: Option<usize>) -> Result<(), commands::CliError> {
    let jobs = match jobs {
        Some(j) => Some(j),
        None => match std::env::var("NETMOD_JOBS") {
            Ok(v) => Some(
                v.parse()
                    .map_err(|_| commands::CliError::usage(format!("NETMOD_JOBS is not a number: `{v}`")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(j) = jobs.filter(|&j| j > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| commands::CliError::runtime(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = init_threads(cli.jobs).and_then(|_| commands::dispatch(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
