//! Graph representation, file formats, bipartite projection and the
//! intervention primitives everything else builds on.

mod bipartite;
mod intervention;
pub mod io;
mod network;
mod state;

pub use bipartite::project_bipartite;
pub use intervention::{apply_intervention, Applied, ChangeKind, Intervention};
pub use io::{load_network, save_network, Incidence, NetworkFormat};
pub use network::WeightedNetwork;
pub use state::{NetworkState, DEFAULT_FOCAL_NAME};

/// Weighted degree of `v` in `net`.
pub fn weighted_degree(net: &WeightedNetwork, v: usize) -> crate::Result<f64> {
    net.weighted_degree(v)
}
