use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use netmod_core::dyadreg::{build_design, fit_quasipoisson, qap_dsp_test, DyadicModel};
use netmod_core::ergm::{fit_mple, ErgmModel, Sampler};
use netmod_core::evolve::{compare_strategies, run_evolution, write_trajectories, EvolutionConfig};
use netmod_core::intervene::{
    degree_heuristic, do_nothing, exhaustive_optimize, greedy_optimize, random_best, Budget, Strategy,
};
use netmod_core::netcore::io::{load_edge_list_with_nodes, write_square_matrix};
use netmod_core::netcore::{load_network, NetworkFormat, NetworkState, WeightedNetwork};
use netmod_core::output::to_json_string;
use netmod_core::rng::{entropy_seed, substream};
use netmod_core::{run_pipeline, Error, MetricSpec, RunConfig};

use super::{
    Command, DyadicArgs, EvolveArgs, FitErgmArgs, MetricArgs, NetworkInput, OptimizeArgs, PipelineArgs, QapArgs,
    SimulateArgs, ValidateArgs,
};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_validation() { 1 } else { 2 };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

pub fn dispatch(command: Command) -> CliResult {
    match command {
        Command::FitDyadic(a) => fit_dyadic(a),
        Command::QapTest(a) => qap_test(a),
        Command::FitErgm(a) => fit_ergm(a),
        Command::Simulate(a) => simulate(a),
        Command::Optimize(a) => optimize(a),
        Command::Evolve(a) => evolve(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Validate(a) => validate(a),
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or_else(entropy_seed);
    eprintln!("seed: {seed}");
    seed
}

fn load(path: &Path, input: &NetworkInput) -> CliResult<WeightedNetwork> {
    let format: NetworkFormat = input.format.parse()?;
    Ok(match (&input.nodes, format) {
        (Some(nodes), NetworkFormat::EdgeListCsv) => load_edge_list_with_nodes(path, nodes)?,
        _ => load_network(path, format)?,
    })
}

fn parse_layer(spec: &str) -> CliResult<(String, PathBuf)> {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(CliError::usage(format!("covariate must be NAME=PATH, got `{spec}`"))),
    }
}

fn load_state(network: &Path, focal_name: &str, covariates: &[String], input: &NetworkInput) -> CliResult<NetworkState> {
    let mut state = NetworkState::new(load(network, input)?).with_focal_name(focal_name)?;
    for spec in covariates {
        let (name, path) = parse_layer(spec)?;
        state = state.with_covariate(name, load(&path, input)?)?;
    }
    Ok(state)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::runtime(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::runtime(e.to_string())),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn dyadic_design(a: &DyadicArgs) -> CliResult<netmod_core::DyadDesign> {
    if !a.names.is_empty() && a.names.len() != a.predictors.len() {
        return Err(CliError::usage(format!(
            "{} names given for {} predictors",
            a.names.len(),
            a.predictors.len()
        )));
    }
    let response = load(&a.response, &a.input)?;
    let mut layers = Vec::with_capacity(a.predictors.len());
    for (k, path) in a.predictors.iter().enumerate() {
        let name = a.names.get(k).cloned().unwrap_or_else(|| stem(path));
        layers.push((name, load(path, &a.input)?));
    }
    let refs: Vec<(String, &WeightedNetwork)> = layers.iter().map(|(n, l)| (n.clone(), l)).collect();
    Ok(build_design(&response, &refs)?)
}

fn fit_dyadic(a: DyadicArgs) -> CliResult {
    resolve_seed(a.seed);
    let model = fit_quasipoisson(&dyadic_design(&a)?)?;
    for (name, (b, se)) in std::iter::once("(intercept)")
        .chain(model.predictor_names.iter().map(String::as_str))
        .zip(model.beta.iter().zip(&model.std_errors))
    {
        eprintln!("{name:>16} {b:>12.4} ({se:.4})");
    }
    eprintln!("dispersion {:.4}", model.dispersion);
    emit(a.out.as_deref(), to_json_string(&model)?.as_bytes())
}

fn qap_test(a: QapArgs) -> CliResult {
    let seed = resolve_seed(a.dyadic.seed);
    let design = dyadic_design(&a.dyadic)?;
    let result = qap_dsp_test(&design, a.permutations, seed)?;
    for (name, p) in result.model.predictor_names.iter().zip(&result.p_values) {
        eprintln!("{name:>16} p = {p:.4}");
    }
    emit(a.dyadic.out.as_deref(), to_json_string(&result)?.as_bytes())
}

fn fit_ergm(a: FitErgmArgs) -> CliResult {
    resolve_seed(a.seed);
    let state = load_state(&a.network, "focal", &a.covariates, &a.input)?;
    let stats = a
        .statistics
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<_>, Error>>()?;
    let model = fit_mple(state.focal(), state.covariates(), &stats, a.mode, a.max_weight)?;
    for (s, t) in model.statistics.iter().zip(&model.theta) {
        eprintln!("{:>20} {t:>10.4}", s.to_string());
    }
    let mut json = model.to_json();
    json.push('\n');
    emit(a.out.as_deref(), json.as_bytes())
}

fn simulate(a: SimulateArgs) -> CliResult {
    let seed = resolve_seed(a.seed);
    let model = ErgmModel::load(&a.model)?;
    let state = load_state(&a.network, "focal", &a.covariates, &a.input)?;
    let sampler = Sampler::new(&model, state.covariates(), state.focal())?;
    let mut net = state.focal().clone();
    let mut rng = substream(seed, "simulate", 0);
    for _ in 0..a.sweeps {
        sampler.sweep(&mut net, &mut rng);
    }
    let mut buf = Vec::new();
    write_square_matrix(&net, &mut buf)?;
    emit(a.out.as_deref(), &buf)
}

fn build_metric(m: &MetricArgs, input: &NetworkInput) -> CliResult<MetricSpec> {
    let spec = match m.metric.as_str() {
        "total-weight" => MetricSpec::TotalEdgeWeight,
        "expected-dyad-sum" => {
            let path = m
                .dyadic_model
                .as_ref()
                .ok_or_else(|| CliError::usage("expected-dyad-sum needs --dyadic-model"))?;
            let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            let model: DyadicModel =
                serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            MetricSpec::ExpectedDyadSum { model }
        }
        "cosine-distance" => {
            let path = m
                .target
                .as_ref()
                .ok_or_else(|| CliError::usage("cosine-distance needs --target"))?;
            MetricSpec::CosineDistanceToTarget { target: load(path, input)? }
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown metric `{other}` (total-weight, expected-dyad-sum, cosine-distance)"
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn optimize(a: OptimizeArgs) -> CliResult {
    let seed = resolve_seed(a.seed);
    let state = load_state(&a.network, &a.focal_name, &a.covariates, &a.input)?;
    let metric = build_metric(&a.metric, &a.input)?;
    let budget = Budget::new(a.budget, a.change)?.with_unit_size(a.unit_size)?;
    let start = Instant::now();
    let result = match a.strategy {
        Strategy::Greedy => greedy_optimize(&state, &metric, &budget)?,
        Strategy::Exhaustive => exhaustive_optimize(&state, &metric, &budget, a.exhaustive_cap)?,
        Strategy::DegreeHeuristic => {
            let layer = a.degree_network.as_deref().unwrap_or(&a.focal_name);
            degree_heuristic(&state, &metric, &budget, layer)?
        }
        Strategy::RandomBest => random_best(&state, &metric, &budget, a.draws, seed)?,
        Strategy::DoNothing => do_nothing(&state, &metric)?,
    };
    let elapsed = start.elapsed().as_secs_f64();
    eprintln!(
        "{}: chosen [{}], final {}",
        result.strategy,
        result.chosen_labels.join(", "),
        result.metric_final
    );
    let report = result.report(&metric, Some(seed), a.record_time.then_some(elapsed));
    emit(a.out.as_deref(), to_json_string(&report)?.as_bytes())
}

fn evolve(a: EvolveArgs) -> CliResult {
    let seed = resolve_seed(a.seed);
    let model = ErgmModel::load(&a.model)?;
    let state = load_state(&a.network, &a.focal_name, &a.covariates, &a.input)?;
    let metric = build_metric(&a.metric, &a.input)?;
    let mut cfg = EvolutionConfig::new(a.steps, a.replicates, seed)?;
    cfg.burn_in = a.burn_in;
    let summary = run_evolution(&state, &model, &metric, &cfg)?;
    eprintln!(
        "step {}: mean {:.6} sd {:.6}",
        a.steps,
        summary.mean.last().copied().unwrap_or(f64::NAN),
        summary.sd.last().copied().unwrap_or(f64::NAN)
    );
    if let Some(path) = &a.summary {
        emit(Some(path), to_json_string(&summary)?.as_bytes())?;
    }
    let report = compare_strategies(&[(a.label.clone(), summary)], false)?;
    let mut buf = Vec::new();
    write_trajectories(&report, &mut buf)?;
    emit(a.out.as_deref(), &buf)
}

fn load_config(path: &Path, seed: Option<u64>) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    if seed.is_some() {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn pipeline(a: PipelineArgs) -> CliResult {
    let mut cfg = load_config(&a.config, a.seed)?;
    if let Some(dir) = a.output_dir {
        cfg.output_dir = std::env::current_dir()
            .map_err(|e| CliError::runtime(e.to_string()))?
            .join(dir);
    }
    let manifest = run_pipeline(&cfg)?;
    eprintln!("seed: {} ({})", manifest.seeds.root, manifest.seeds.source);
    for opt in &manifest.optimizations {
        let chosen: Vec<&str> = opt.chosen.iter().map(|c| c.target.as_str()).collect();
        eprintln!("{}: chosen [{}], final {}", opt.strategy, chosen.join(", "), opt.metric_final);
    }
    eprintln!("wrote {} files to {}", manifest.outputs.len() + 1, cfg.output_path().display());
    Ok(())
}

fn validate(a: ValidateArgs) -> CliResult {
    let cfg = load_config(&a.config, a.seed)?;
    cfg.validate()?;
    eprintln!("OK");
    Ok(())
}
