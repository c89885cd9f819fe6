//! Dyadic quasi-Poisson regression and MRQAP permutation inference.

mod design;
mod glm;
mod qap;

pub use design::{build_design, DyadDesign};
pub use glm::{fit_quasipoisson, predict_dyad, DyadicModel, MAX_ITERATIONS, SEPARATION_BOUND, TOLERANCE};
pub use qap::{qap_dsp_test, QapResult, MAX_RETRIES, MIN_PERMUTATIONS};
