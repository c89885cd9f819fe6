//! Stand-in data shaped like the two case studies, for tests and demos.
//!
//! Neither generator reproduces a real dataset; they produce layers with the
//! same roles and rough sparsity so the full pipeline can run end to end.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::ergm::{ErgmModel, Sampler, StatisticSpec};
use crate::error::Result;
use crate::netcore::{Incidence, NetworkState, WeightedNetwork};
use crate::rng::{substream, StreamRng};

pub const COMMUNICATION: &str = "communication";
pub const NOORDIN_COVARIATES: [&str; 5] = ["friendship", "kin", "religion", "organization", "education"];

/// Coefficients of the response model: intercept, communication, education,
/// organization.
pub const COLLABORATION_BETA: [f64; 4] = [-2.5, 1.3, 1.0, 0.4];

/// Layers of a covert-network study: a binary communication network (the
/// focal layer), exogenous covariate layers, and a count-valued
/// collaboration response.
#[derive(Clone, Debug)]
pub struct NoordinStyle {
    pub state: NetworkState,
    pub collaboration: WeightedNetwork,
    /// Generating ERGM of the communication layer.
    pub communication_model: ErgmModel,
}

pub fn communication_statistics() -> Vec<StatisticSpec> {
    let mut stats = vec![
        StatisticSpec::Edges,
        StatisticSpec::Isolates,
        StatisticSpec::Gwesp { alpha: 0.25 },
    ];
    stats.extend(NOORDIN_COVARIATES.iter().map(|c| StatisticSpec::EdgeCovariateSum { name: c.to_string() }));
    stats
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

/// Nodes sharing at least one group each get +1 per shared group.
fn shared_groups(names: &[String], groups: &[Vec<usize>]) -> Result<WeightedNetwork> {
    let mut net = WeightedNetwork::empty(names.to_vec())?;
    for (i, j) in net.clone().dyads() {
        let shared = groups[i].iter().filter(|g| groups[j].contains(g)).count();
        if shared > 0 {
            net.set_weight(i, j, shared as f64);
        }
    }
    Ok(net)
}

fn memberships(rng: &mut StreamRng, n: usize, groups: usize, join: f64, extra: f64) -> Vec<Vec<usize>> {
    (0..n)
        .map(|_| {
            if !rng.random_bool(join) {
                return Vec::new();
            }
            let k = if groups > 1 && rng.random_bool(extra) { 2 } else { 1 };
            sample(rng, groups, k).into_vec()
        })
        .collect()
}

fn bernoulli_layer(names: &[String], rng: &mut StreamRng, p: impl Fn(usize, usize) -> f64) -> Result<WeightedNetwork> {
    let mut net = WeightedNetwork::empty(names.to_vec())?;
    for (i, j) in net.clone().dyads() {
        if rng.random_bool(p(i, j).clamp(0.0, 1.0)) {
            net.set_weight(i, j, 1.0);
        }
    }
    Ok(net)
}

pub fn noordin_style(n: usize, seed: u64) -> Result<NoordinStyle> {
    let names = labels("m", n);
    let mut rng = substream(seed, "synthetic.covariates", 0);
    let orgs = memberships(&mut rng, n, (n / 8).max(3), 1.0, 0.4);
    let schools = memberships(&mut rng, n, 4, 0.6, 0.0);
    let faiths = memberships(&mut rng, n, 3, 0.7, 0.0);
    let organization = shared_groups(&names, &orgs)?;
    let education = shared_groups(&names, &schools)?;
    let religion = shared_groups(&names, &faiths)?;
    let friendship = bernoulli_layer(&names, &mut rng, |i, j| 0.03 + 0.12 * organization.weight(i, j).min(1.0))?;
    let kin = bernoulli_layer(&names, &mut rng, |_, _| 0.03)?;

    let mut state = NetworkState::new(WeightedNetwork::empty(names.clone())?).with_focal_name(COMMUNICATION)?;
    for (name, layer) in NOORDIN_COVARIATES
        .iter()
        .zip([friendship, kin, religion, organization, education])
    {
        state = state.with_covariate(*name, layer)?;
    }

    let model = ErgmModel::binary(
        communication_statistics(),
        vec![-4.5, -1.0, 0.5, 2.5, 2.5, 1.0, 0.8, 0.5],
    )?;
    let mut comm = state.focal().clone();
    let mut sim_rng = substream(seed, "synthetic.communication", 0);
    let sampler = Sampler::new(&model, state.covariates(), &comm)?;
    for _ in 0..30 {
        sampler.sweep(&mut comm, &mut sim_rng);
    }
    let state = state.with_focal(comm)?;

    let mut rng = substream(seed, "synthetic.collaboration", 0);
    let comm = state.focal();
    let (edu, org) = (state.layer("education")?, state.layer("organization")?);
    let mut collaboration = WeightedNetwork::empty(names)?;
    let [b0, b_comm, b_edu, b_org] = COLLABORATION_BETA;
    for (i, j) in comm.dyads() {
        let mu = (b0 + b_comm * comm.weight(i, j) + b_edu * edu.weight(i, j) + b_org * org.weight(i, j)).exp();
        let y = Poisson::new(mu).expect("positive mean").sample(&mut rng);
        if y > 0.0 {
            collaboration.set_weight(i, j, y);
        }
    }
    Ok(NoordinStyle {
        state,
        collaboration,
        communication_model: model,
    })
}

pub const ECOSYSTEM_ROLES: [&str; 8] = [
    "self",
    "government",
    "university",
    "investor",
    "ngo",
    "corporate",
    "incubator",
    "media",
];

/// Organization-by-role incidence tables for one ecosystem and for a target
/// ecosystem with a different role mix.
#[derive(Clone, Debug)]
pub struct EcosystemStyle {
    pub city: Incidence,
    pub target: Incidence,
}

fn incidence(rng: &mut StreamRng, entities: usize, propensity: &[f64]) -> Incidence {
    let rows = (0..entities)
        .map(|_| {
            propensity
                .iter()
                .map(|&p| if rng.random_bool(p) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    Incidence {
        roles: ECOSYSTEM_ROLES.iter().map(|s| s.to_string()).collect(),
        rows,
    }
}

pub fn ecosystem_style(entities: usize, seed: u64) -> EcosystemStyle {
    let mut rng = substream(seed, "synthetic.ecosystem", 0);
    let city = incidence(&mut rng, entities, &[0.9, 0.3, 0.15, 0.1, 0.35, 0.1, 0.2, 0.05]);
    let target = incidence(&mut rng, entities, &[0.9, 0.2, 0.35, 0.4, 0.1, 0.3, 0.3, 0.15]);
    EcosystemStyle { city, target }
}
