//! Network intervention toolkit.
//!
//! Choose a graph metric (optionally calibrated with a dyadic quasi-Poisson
//! model), search for the budgeted set of changes that minimizes it, then
//! simulate how the modified network drifts under a fitted ERGM.

pub mod dyadreg;
pub mod ergm;
pub mod evolve;
pub mod intervene;
mod error;
pub mod metrics;
pub mod netcore;
pub mod output;
pub mod pipeline;
pub mod rng;
pub mod synthetic;

pub use dyadreg::{DyadDesign, DyadicModel, QapResult};
pub use ergm::{ErgmMode, ErgmModel, StatisticSpec};
pub use evolve::{EvolutionConfig, EvolutionSummary};
pub use error::{Error, Result};
pub use intervene::{Budget, OptimizationResult, Strategy};
pub use metrics::{MetricSpec, RemovalSemantics};
pub use netcore::{ChangeKind, Intervention, NetworkState, WeightedNetwork};
pub use pipeline::{run_pipeline, RunConfig, RunManifest};
