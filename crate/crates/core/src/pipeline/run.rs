use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{InputFormat, MetricKind, ModelSource, RunConfig};
use crate::dyadreg::{build_design, fit_quasipoisson, qap_dsp_test, DyadicModel};
use crate::ergm::{fit_mple, ErgmModel};
use crate::error::{Error, Result};
use crate::evolve::{compare_strategies, percentage_improvement, run_evolution, write_trajectories, EvolutionConfig, EvolutionSummary};
use crate::intervene::{
    degree_heuristic, do_nothing, exhaustive_optimize, greedy_optimize, random_best, Budget, OptimizationReport,
    OptimizationResult, Strategy,
};
use crate::metrics::{evaluate, MetricSpec};
use crate::netcore::io::{load_edge_list_with_nodes, load_incidence};
use crate::netcore::{load_network, project_bipartite, NetworkState, WeightedNetwork};
use crate::output::{sha256_file, write_json};
use crate::rng::{derive_seed, entropy_seed};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";
pub const TRAJECTORIES_FILE: &str = "trajectories.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub root: u64,
    /// `config` or `entropy`.
    pub source: String,
    pub qap: u64,
    pub optimizer: u64,
    pub evolution: u64,
}

impl Seeds {
    pub fn from_root(root: u64, source: &str) -> Self {
        Self {
            root,
            source: source.to_string(),
            qap: derive_seed(root, "qap", 0),
            optimizer: derive_seed(root, "optimizer", 0),
            evolution: derive_seed(root, "evolution", 0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

/// Record of a pipeline run. Wall-clock timings live in a separate
/// `timings.json` so that the manifest itself is reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub status: String,
    pub config: RunConfig,
    pub seeds: Seeds,
    pub stages: Vec<StageRecord>,
    pub optimizations: Vec<OptimizationReport>,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Clone, Debug, Serialize)]
struct FinalStep {
    strategy: Strategy,
    metric_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    evolved_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    evolved_sd: Option<f64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a RunConfig,
    seeds: &'a Seeds,
    metric: &'a str,
    strategies: Vec<FinalStep>,
}

struct Run<'a> {
    cfg: &'a RunConfig,
    dir: PathBuf,
    manifest: RunManifest,
    files: Vec<String>,
    timings: Vec<(String, f64)>,
}

struct Inputs {
    state: NetworkState,
    response: Option<WeightedNetwork>,
    target: Option<WeightedNetwork>,
}

impl Run<'_> {
    fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    fn wrote(&mut self, file: &str) {
        self.files.push(file.to_string());
    }

    fn stage<T>(&mut self, name: &str, body: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        log::info!("stage {name}");
        let start = Instant::now();
        let out = body(self);
        self.timings.push((name.to_string(), start.elapsed().as_secs_f64()));
        let (status, error) = match &out {
            Ok(_) => ("ok", None),
            Err(e) => ("failed", Some(e.to_string())),
        };
        self.manifest.stages.push(StageRecord {
            name: name.to_string(),
            status: status.to_string(),
            error,
        });
        out.map_err(|source| Error::Stage {
            stage: name.to_string(),
            source: Box::new(source),
        })
    }

    fn finish(mut self, status: &str) -> Result<RunManifest> {
        self.manifest.status = status.to_string();
        self.manifest.outputs = self
            .files
            .iter()
            .map(|f| {
                Ok(OutputRecord {
                    file: f.clone(),
                    sha256: sha256_file(self.path(f))?,
                })
            })
            .collect::<Result<_>>()?;
        write_json(self.path(MANIFEST_FILE), &self.manifest)?;
        let timings: std::collections::BTreeMap<_, _> = self.timings.into_iter().collect();
        write_json(self.dir.join(TIMINGS_FILE), &timings)?;
        Ok(self.manifest)
    }
}

fn load_layer(cfg: &RunConfig, path: &Path) -> Result<WeightedNetwork> {
    let path = cfg.resolve(path);
    match (cfg.inputs.network_format(), &cfg.inputs.nodes) {
        (None, _) => project_bipartite(&load_incidence(&path)?),
        (Some(fmt), None) => load_network(&path, fmt),
        (Some(_), Some(nodes)) if cfg.inputs.format == InputFormat::EdgeListCsv => {
            load_edge_list_with_nodes(&path, cfg.resolve(nodes))
        }
        (Some(fmt), Some(_)) => load_network(&path, fmt),
    }
}

fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    let i = &cfg.inputs;
    let mut state = NetworkState::new(load_layer(cfg, &i.focal)?).with_focal_name(i.focal_name.clone())?;
    for (name, path) in &i.covariates {
        state = state.with_covariate(name.clone(), load_layer(cfg, path)?)?;
    }
    let same = |net: WeightedNetwork, what: &str| -> Result<WeightedNetwork> {
        if net.same_layout(state.focal()) {
            Ok(net)
        } else {
            Err(Error::DimensionMismatch(format!("{what} network has a different node set")))
        }
    };
    let response = i.response.as_deref().map(|p| load_layer(cfg, p)).transpose()?;
    let response = response.map(|r| same(r, "response")).transpose()?;
    let target = i.target.as_deref().map(|p| load_layer(cfg, p)).transpose()?;
    let target = target.map(|t| same(t, "target")).transpose()?;
    Ok(Inputs { state, response, target })
}

fn calibrate(run: &mut Run<'_>, inputs: &Inputs, seeds: &Seeds) -> Result<MetricSpec> {
    let cfg = run.cfg;
    let state = &inputs.state;
    let metric = match cfg.metric.kind {
        MetricKind::TotalWeight => MetricSpec::TotalEdgeWeight,
        MetricKind::CosineDistance => MetricSpec::CosineDistanceToTarget {
            target: inputs.target.clone().expect("validated"),
        },
        MetricKind::ExpectedDyadSum => {
            let model = match cfg.metric.source {
                ModelSource::Load => {
                    let path = cfg.resolve(cfg.metric.model.as_deref().expect("validated"));
                    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                    let model: DyadicModel =
                        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                    model.validate()?;
                    model
                }
                ModelSource::Fit => {
                    let names: Vec<String> = if cfg.metric.predictors.is_empty() {
                        std::iter::once(state.focal_name().to_string())
                            .chain(state.covariates().keys().cloned())
                            .collect()
                    } else {
                        cfg.metric.predictors.clone()
                    };
                    let layers = names
                        .iter()
                        .map(|n| Ok((n.clone(), state.layer(n)?)))
                        .collect::<Result<Vec<_>>>()?;
                    let design = build_design(inputs.response.as_ref().expect("validated"), &layers)?;
                    let model = fit_quasipoisson(&design)?;
                    if cfg.metric.qap_permutations > 0 {
                        let qap = qap_dsp_test(&design, cfg.metric.qap_permutations, seeds.qap)?;
                        write_json(run.path("qap.json"), &qap)?;
                        run.wrote("qap.json");
                    }
                    model
                }
            };
            write_json(run.path("dyadic_model.json"), &model)?;
            run.wrote("dyadic_model.json");
            MetricSpec::ExpectedDyadSum { model }
        }
    };
    metric.validate()?;
    evaluate(&metric, state)?;
    Ok(metric)
}

fn fit_ergm(run: &mut Run<'_>, state: &NetworkState) -> Result<ErgmModel> {
    let ergm = run.cfg.ergm.as_ref().expect("validated");
    let model = match &ergm.model {
        Some(path) => ErgmModel::load(run.cfg.resolve(path))?,
        None => fit_mple(
            state.focal(),
            state.covariates(),
            &ergm.parsed_statistics()?,
            ergm.mode,
            ergm.max_weight,
        )?,
    };
    model.save(run.path("ergm_model.json"))?;
    run.wrote("ergm_model.json");
    Ok(model)
}

fn optimize(run: &mut Run<'_>, state: &NetworkState, metric: &MetricSpec, seeds: &Seeds) -> Result<Vec<OptimizationResult>> {
    let opt = &run.cfg.optimize;
    let budget = Budget::new(opt.budget, opt.change)?.with_unit_size(opt.unit_size)?;
    let degree_layer = opt.degree_network.clone().unwrap_or_else(|| state.focal_name().to_string());
    let mut results = Vec::new();
    for &strategy in &opt.strategies {
        let start = Instant::now();
        let result = match strategy {
            Strategy::Greedy => greedy_optimize(state, metric, &budget)?,
            Strategy::Exhaustive => exhaustive_optimize(state, metric, &budget, opt.exhaustive_cap)?,
            Strategy::DegreeHeuristic => degree_heuristic(state, metric, &budget, &degree_layer)?,
            Strategy::RandomBest => random_best(state, metric, &budget, opt.draws, seeds.optimizer)?,
            Strategy::DoNothing => do_nothing(state, metric)?,
        };
        run.timings
            .push((format!("optimize.{strategy}"), start.elapsed().as_secs_f64()));
        let seed = (strategy == Strategy::RandomBest).then_some(seeds.optimizer);
        let report = result.report(metric, seed, None);
        let file = format!("optimization_{strategy}.json");
        write_json(run.path(&file), &report)?;
        run.wrote(&file);
        run.manifest.optimizations.push(report);
        results.push(result);
    }
    Ok(results)
}

fn evolve(
    run: &mut Run<'_>,
    results: &[OptimizationResult],
    model: &ErgmModel,
    metric: &MetricSpec,
    seeds: &Seeds,
) -> Result<Vec<EvolutionSummary>> {
    let ev = run.cfg.evolution.as_ref().expect("validated");
    let cfg = EvolutionConfig {
        steps: ev.steps,
        replicates: ev.replicates,
        seed: seeds.evolution,
        burn_in: ev.burn_in,
        rescale_to_unit: false,
    };
    let mut named = Vec::with_capacity(results.len());
    for r in results {
        let summary = run_evolution(&r.final_state, model, metric, &cfg)?;
        named.push((r.strategy.to_string(), summary));
    }
    let report = compare_strategies(&named, ev.rescale)?;
    let mut csv = Vec::new();
    write_trajectories(&report, &mut csv)?;
    fs::write(run.path(TRAJECTORIES_FILE), csv).map_err(|e| Error::io(run.path(TRAJECTORIES_FILE), e))?;
    run.wrote(TRAJECTORIES_FILE);

    #[derive(Serialize)]
    struct Evolution<'a> {
        config: &'a EvolutionConfig,
        comparison: &'a crate::evolve::ComparisonReport,
        summaries: &'a [(String, EvolutionSummary)],
    }
    write_json(
        run.path("evolution.json"),
        &Evolution {
            config: &cfg,
            comparison: &report,
            summaries: &named,
        },
    )?;
    run.wrote("evolution.json");

    if let Some((_, baseline)) = named.iter().find(|(n, _)| n == Strategy::DoNothing.as_str()) {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["step", "strategy", "estimate", "lower", "upper"]).map_err(csv_err)?;
        for (name, treated) in named.iter().filter(|(n, _)| n != Strategy::DoNothing.as_str()) {
            for (t, step) in percentage_improvement(treated, baseline)?.into_iter().enumerate() {
                let cells = match step {
                    Ok(s) => [s.estimate.to_string(), s.lower.to_string(), s.upper.to_string()],
                    Err(_) => Default::default(),
                };
                w.write_record([t.to_string(), name.clone(), cells[0].clone(), cells[1].clone(), cells[2].clone()])
                    .map_err(csv_err)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(run.path("improvement.csv"), bytes).map_err(|e| Error::io(run.path("improvement.csv"), e))?;
        run.wrote("improvement.csv");
    }
    Ok(named.into_iter().map(|(_, s)| s).collect())
}

/// Runs calibration, optimization and (if configured) evolution, writing
/// every artifact and a manifest to the output directory. On a stage failure
/// the manifest records it and the stage error is returned.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let (root, source) = match cfg.seed {
        Some(s) => (s, "config"),
        None => (entropy_seed(), "entropy"),
    };
    let seeds = Seeds::from_root(root, source);
    let dir = cfg.output_path();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let mut run = Run {
        cfg,
        dir,
        manifest: RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            status: "running".into(),
            config: cfg.clone(),
            seeds: seeds.clone(),
            stages: Vec::new(),
            optimizations: Vec::new(),
            outputs: Vec::new(),
        },
        files: Vec::new(),
        timings: Vec::new(),
    };

    macro_rules! stage {
        ($name:expr, $body:expr) => {
            match run.stage($name, $body) {
                Ok(v) => v,
                Err(e) => {
                    run.finish("failed")?;
                    return Err(e);
                }
            }
        };
    }

    let inputs = stage!("load", |_| load_inputs(cfg));
    let metric = stage!("calibrate", |r| calibrate(r, &inputs, &seeds));
    let ergm = if cfg.evolution.is_some() {
        Some(stage!("ergm", |r| fit_ergm(r, &inputs.state)))
    } else {
        None
    };
    let results = stage!("optimize", |r| optimize(r, &inputs.state, &metric, &seeds));
    let evolved = match &ergm {
        Some(model) => Some(stage!("evolve", |r| evolve(r, &results, model, &metric, &seeds))),
        None => None,
    };

    let strategies = results
        .iter()
        .enumerate()
        .map(|(k, r)| FinalStep {
            strategy: r.strategy,
            metric_final: r.metric_final,
            evolved_mean: evolved.as_ref().map(|e| *e[k].mean.last().expect("steps >= 1")),
            evolved_sd: evolved.as_ref().map(|e| *e[k].sd.last().expect("steps >= 1")),
        })
        .collect();
    write_json(
        run.path("summary.json"),
        &Summary {
            config: cfg,
            seeds: &seeds,
            metric: metric.name(),
            strategies,
        },
    )?;
    run.wrote("summary.json");
    run.finish("complete")
}
