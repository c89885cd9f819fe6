//! Exponential random graph models: statistics, pseudolikelihood fitting
//! and Metropolis-Hastings simulation.

mod model;
mod mple;
mod sampler;
mod stats;

pub use model::{ErgmMode, ErgmModel, ReferenceMeasure};
pub use mple::{fit_mple, MAX_ITERATIONS as MPLE_MAX_ITERATIONS, TOLERANCE as MPLE_TOLERANCE};
pub use sampler::{simulate_step, Sampler};
pub use stats::{change_statistics, compute_statistics, gwesp, gwesp_partner_weight, StatisticSpec};
