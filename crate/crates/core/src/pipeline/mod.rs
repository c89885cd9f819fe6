//! Calibrate, optimize, evolve and report as one reproducible run.

mod config;
mod run;

pub use config::{
    ErgmConfig, EvolutionSection, InputFormat, InputsConfig, MetricConfig, MetricKind, ModelSource, OptimizeConfig,
    RunConfig,
};
pub use run::{run_pipeline, OutputRecord, RunManifest, Seeds, StageRecord, MANIFEST_FILE, TIMINGS_FILE, TRAJECTORIES_FILE};
