use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ergm::{ErgmMode, StatisticSpec};
use crate::intervene::{Strategy, DEFAULT_EVALUATION_CAP};
use crate::netcore::{ChangeKind, NetworkFormat, DEFAULT_FOCAL_NAME};

/// A full run, usually read from a TOML file. Relative paths are resolved
/// against the directory holding the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Root seed; drawn from system entropy when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    pub inputs: InputsConfig,
    pub metric: MetricConfig,
    pub optimize: OptimizeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ergm: Option<ErgmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionSection>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    SquareMatrixCsv,
    EdgeListCsv,
    /// Entity-by-role table, projected onto the roles.
    IncidenceCsv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsConfig {
    #[serde(default = "default_format")]
    pub format: InputFormat,
    /// Node list fixing the label order of edge-list inputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<PathBuf>,
    pub focal: PathBuf,
    #[serde(default = "default_focal_name")]
    pub focal_name: String,
    #[serde(default)]
    pub covariates: BTreeMap<String, PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<PathBuf>,
}

fn default_format() -> InputFormat {
    InputFormat::SquareMatrixCsv
}

fn default_focal_name() -> String {
    DEFAULT_FOCAL_NAME.to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    ExpectedDyadSum,
    CosineDistance,
    TotalWeight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelSource {
    Fit,
    Load,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub kind: MetricKind,
    #[serde(default = "default_source")]
    pub source: ModelSource,
    /// Saved dyadic model, for `source = "load"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    /// Predictor layers of the dyadic fit; all layers when empty.
    #[serde(default)]
    pub predictors: Vec<String>,
    /// 0 skips the permutation test.
    #[serde(default)]
    pub qap_permutations: usize,
}

fn default_source() -> ModelSource {
    ModelSource::Fit
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_change")]
    pub change: ChangeKind,
    pub budget: usize,
    #[serde(default = "default_unit_size")]
    pub unit_size: f64,
    #[serde(default = "default_draws")]
    pub draws: usize,
    /// Layer ranked by the degree heuristic; the focal network by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_network: Option<String>,
    #[serde(default = "default_cap")]
    pub exhaustive_cap: u64,
}

fn default_change() -> ChangeKind {
    ChangeKind::RemoveNodeReplace
}

fn default_unit_size() -> f64 {
    1.0
}

fn default_draws() -> usize {
    100
}

fn default_cap() -> u64 {
    DEFAULT_EVALUATION_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErgmConfig {
    #[serde(default = "default_mode")]
    pub mode: ErgmMode,
    /// Terms such as `edges`, `gwesp:0.25`, `edgecov:kin`.
    #[serde(default)]
    pub statistics: Vec<String>,
    /// Saved model to use instead of fitting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_weight: Option<u32>,
}

fn default_mode() -> ErgmMode {
    ErgmMode::Binary
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub steps: usize,
    pub replicates: usize,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default)]
    pub rescale: bool,
}

impl ErgmConfig {
    pub fn parsed_statistics(&self) -> Result<Vec<StatisticSpec>> {
        self.statistics.iter().map(|s| s.parse()).collect()
    }
}

impl InputsConfig {
    pub(crate) fn network_format(&self) -> Option<NetworkFormat> {
        match self.format {
            InputFormat::SquareMatrixCsv => Some(NetworkFormat::SquareMatrixCsv),
            InputFormat::EdgeListCsv => Some(NetworkFormat::EdgeListCsv),
            InputFormat::IncidenceCsv => None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Validation(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    fn input_files(&self) -> Vec<(&'static str, &Path)> {
        let i = &self.inputs;
        let mut files: Vec<(&str, &Path)> = vec![("focal", i.focal.as_path())];
        files.extend(i.covariates.values().map(|p| ("covariate", p.as_path())));
        files.extend(i.nodes.as_deref().map(|p| ("nodes", p)));
        files.extend(i.response.as_deref().map(|p| ("response", p)));
        files.extend(i.target.as_deref().map(|p| ("target", p)));
        files.extend(self.metric.model.as_deref().map(|p| ("metric model", p)));
        if let Some(e) = &self.ergm {
            files.extend(e.model.as_deref().map(|p| ("ergm model", p)));
        }
        files
    }

    /// Checks the configuration and that every referenced file exists,
    /// without reading any data.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        for (role, path) in self.input_files() {
            if !self.resolve(path).is_file() {
                return bad(format!("{role} file {} does not exist", path.display()));
            }
        }
        let out = self.output_path();
        if out.exists() && !out.is_dir() {
            return bad(format!("output path {} is not a directory", out.display()));
        }
        if self.inputs.focal_name.is_empty() || self.inputs.covariates.contains_key(&self.inputs.focal_name) {
            return bad("focal layer name must be non-empty and distinct from covariate names".into());
        }
        if self.inputs.format == InputFormat::EdgeListCsv && self.inputs.nodes.is_none() {
            log::warn!("edge-list inputs without a node list: labels are inferred per file");
        }

        match (self.metric.kind, self.metric.source) {
            (MetricKind::ExpectedDyadSum, ModelSource::Fit) if self.inputs.response.is_none() => {
                return bad("fitting the dyadic model needs `inputs.response`".into())
            }
            (MetricKind::ExpectedDyadSum, ModelSource::Load) if self.metric.model.is_none() => {
                return bad("`metric.source = \"load\"` needs `metric.model`".into())
            }
            (MetricKind::CosineDistance, _) if self.inputs.target.is_none() => {
                return bad("the cosine metric needs `inputs.target`".into())
            }
            _ => {}
        }
        for p in &self.metric.predictors {
            if *p != self.inputs.focal_name && !self.inputs.covariates.contains_key(p) {
                return bad(format!("predictor `{p}` is not an input layer"));
            }
        }
        if self.metric.qap_permutations > 0 && self.metric.qap_permutations < crate::dyadreg::MIN_PERMUTATIONS {
            return bad(format!(
                "qap_permutations must be 0 or at least {}",
                crate::dyadreg::MIN_PERMUTATIONS
            ));
        }

        let opt = &self.optimize;
        if opt.strategies.is_empty() {
            return bad("no strategies requested".into());
        }
        if opt.budget == 0 {
            return Err(Error::InvalidBudget("budget must allow at least one unit".into()));
        }
        if !(opt.unit_size > 0.0 && opt.unit_size.is_finite()) {
            return Err(Error::InvalidBudget("unit size must be positive".into()));
        }
        for s in &opt.strategies {
            let needs_nodes = matches!(s, Strategy::Exhaustive | Strategy::DegreeHeuristic);
            if needs_nodes && !opt.change.is_node_removal() {
                return bad(format!("strategy {s} needs a node-removal change type"));
            }
            if *s == Strategy::RandomBest && opt.draws == 0 {
                return bad("random-best needs at least one draw".into());
            }
        }
        if opt.change == ChangeKind::SetAttribute {
            return bad("attribute changes have no file-based candidate list; use the library".into());
        }
        if let Some(layer) = &opt.degree_network {
            if *layer != self.inputs.focal_name && !self.inputs.covariates.contains_key(layer) {
                return bad(format!("degree network `{layer}` is not an input layer"));
            }
        }

        if let Some(ev) = &self.evolution {
            if ev.steps == 0 || ev.replicates == 0 {
                return bad("evolution needs at least one step and one replicate".into());
            }
            let Some(ergm) = &self.ergm else {
                return bad("evolution needs an `[ergm]` section".into());
            };
            if ergm.model.is_none() {
                if ergm.statistics.is_empty() {
                    return bad("ergm fit needs at least one statistic".into());
                }
                for spec in ergm.parsed_statistics()? {
                    if let StatisticSpec::EdgeCovariateSum { name } = &spec {
                        if !self.inputs.covariates.contains_key(name) {
                            return bad(format!("edgecov `{name}` is not a covariate layer"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
