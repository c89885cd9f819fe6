//! Sufficient statistics and their single-dyad change values.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::WeightedNetwork;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StatisticSpec {
    /// Number of tied dyads (binary networks).
    Edges,
    /// Nodes with zero weighted degree.
    Isolates,
    /// Geometrically weighted edgewise shared partners with fixed decay.
    Gwesp { alpha: f64 },
    /// Sum of a dyadic covariate over tied dyads.
    EdgeCovariateSum { name: String },
    /// Number of dyads with positive weight (valued networks).
    NonZero,
    /// Sum of upper-triangle weights.
    WeightSum,
    /// `sum_{i<j} min(w_ij, max_k min(w_ik, w_kj))`.
    TransitiveWeights,
}

impl StatisticSpec {
    pub fn binary_only(&self) -> bool {
        matches!(self, StatisticSpec::Edges | StatisticSpec::Gwesp { .. })
    }

    pub fn allowed_in_binary(&self) -> bool {
        matches!(
            self,
            StatisticSpec::Edges
                | StatisticSpec::Isolates
                | StatisticSpec::Gwesp { .. }
                | StatisticSpec::EdgeCovariateSum { .. }
        )
    }

    pub fn allowed_in_valued(&self) -> bool {
        !self.binary_only()
    }
}

impl fmt::Display for StatisticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatisticSpec::Edges => write!(f, "edges"),
            StatisticSpec::Isolates => write!(f, "isolates"),
            StatisticSpec::Gwesp { alpha } => write!(f, "gwesp:{alpha}"),
            StatisticSpec::EdgeCovariateSum { name } => write!(f, "edgecov:{name}"),
            StatisticSpec::NonZero => write!(f, "nonzero"),
            StatisticSpec::WeightSum => write!(f, "sum"),
            StatisticSpec::TransitiveWeights => write!(f, "transitiveweights"),
        }
    }
}

impl FromStr for StatisticSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let spec = match (head, arg) {
            ("edges", None) => StatisticSpec::Edges,
            ("isolates", None) => StatisticSpec::Isolates,
            ("gwesp", Some(a)) => StatisticSpec::Gwesp {
                alpha: a
                    .parse()
                    .map_err(|_| Error::Validation(format!("bad gwesp decay `{a}`")))?,
            },
            ("edgecov", Some(name)) if !name.is_empty() => StatisticSpec::EdgeCovariateSum { name: name.to_string() },
            ("nonzero", None) => StatisticSpec::NonZero,
            ("sum", None) => StatisticSpec::WeightSum,
            ("transitiveweights", None) => StatisticSpec::TransitiveWeights,
            _ => return Err(Error::Validation(format!("unknown statistic `{s}`"))),
        };
        Ok(spec)
    }
}

/// Weight `1 - (1 - e^-alpha)^i` given to a tied pair with `i` shared partners.
pub fn gwesp_partner_weight(alpha: f64, shared: u32) -> f64 {
    1.0 - (1.0 - (-alpha).exp()).powi(shared as i32)
}

/// A statistic with its covariate resolved.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Term<'a> {
    Edges,
    Isolates,
    Gwesp { scale: f64, ratio: f64 },
    EdgeCov(&'a WeightedNetwork),
    NonZero,
    WeightSum,
    TransitiveWeights,
}

pub(crate) fn resolve<'a>(
    specs: &[StatisticSpec],
    covariates: &'a BTreeMap<String, WeightedNetwork>,
    net: &WeightedNetwork,
) -> Result<Vec<Term<'a>>> {
    specs
        .iter()
        .map(|s| {
            Ok(match s {
                StatisticSpec::Edges => Term::Edges,
                StatisticSpec::Isolates => Term::Isolates,
                StatisticSpec::Gwesp { alpha } => {
                    if !(*alpha >= 0.0 && alpha.is_finite()) {
                        return Err(Error::Validation(format!("gwesp decay must be >= 0, got {alpha}")));
                    }
                    Term::Gwesp {
                        scale: alpha.exp(),
                        ratio: 1.0 - (-alpha).exp(),
                    }
                }
                StatisticSpec::EdgeCovariateSum { name } => {
                    let cov = covariates
                        .get(name)
                        .ok_or_else(|| Error::MissingCovariate(name.clone()))?;
                    if !cov.same_layout(net) {
                        return Err(Error::DimensionMismatch(format!(
                            "covariate `{name}` does not share the network's nodes"
                        )));
                    }
                    Term::EdgeCov(cov)
                }
                StatisticSpec::NonZero => Term::NonZero,
                StatisticSpec::WeightSum => Term::WeightSum,
                StatisticSpec::TransitiveWeights => Term::TransitiveWeights,
            })
        })
        .collect()
}

pub(crate) fn check_binary(specs: &[StatisticSpec], net: &WeightedNetwork) -> Result<()> {
    if specs.iter().any(StatisticSpec::binary_only) && !net.is_binary() {
        return Err(Error::ModeMismatch(
            "edges/gwesp statistics need a binary network".into(),
        ));
    }
    Ok(())
}

#[inline]
fn tied(x: f64) -> bool {
    x > 0.0
}

fn shared_partners(net: &WeightedNetwork, a: usize, b: usize, skip: usize) -> u32 {
    let (ra, rb) = (net.row(a), net.row(b));
    let mut count = 0;
    for m in 0..net.n() {
        if m != skip && tied(ra[m]) && tied(rb[m]) {
            count += 1;
        }
    }
    count
}

fn gwesp_value(net: &WeightedNetwork, scale: f64, ratio: f64) -> f64 {
    let mut total = 0.0;
    for (i, j) in net.dyads() {
        if tied(net.weight(i, j)) {
            let sp = shared_partners(net, i, j, usize::MAX);
            if sp > 0 {
                total += scale * (1.0 - ratio.powi(sp as i32));
            }
        }
    }
    total
}

/// Transitive-weight term for dyad `(a, b)` with `(i, j)` read as `x`.
fn transitive_term(net: &WeightedNetwork, a: usize, b: usize, i: usize, j: usize, x: f64) -> f64 {
    let w = |p: usize, q: usize| {
        if (p == i && q == j) || (p == j && q == i) {
            x
        } else {
            net.weight(p, q)
        }
    };
    let mut best = 0.0f64;
    for m in 0..net.n() {
        if m != a && m != b {
            best = best.max(w(a, m).min(w(m, b)));
        }
    }
    w(a, b).min(best)
}

impl Term<'_> {
    pub(crate) fn value(&self, net: &WeightedNetwork) -> f64 {
        match *self {
            Term::Edges | Term::NonZero => net.dyads().filter(|&(i, j)| tied(net.weight(i, j))).count() as f64,
            Term::Isolates => (0..net.n())
                .filter(|&v| net.row(v).iter().all(|&x| x == 0.0))
                .count() as f64,
            Term::Gwesp { scale, ratio } => gwesp_value(net, scale, ratio),
            Term::EdgeCov(cov) => net
                .dyads()
                .filter(|&(i, j)| tied(net.weight(i, j)))
                .map(|(i, j)| cov.weight(i, j))
                .sum(),
            Term::WeightSum => net.total_weight(),
            Term::TransitiveWeights => net
                .dyads()
                .map(|(a, b)| transitive_term(net, a, b, usize::MAX, usize::MAX, 0.0))
                .sum(),
        }
    }

    /// `s(y; (i, j) <- new) - s(y)`. Requires `i != j`.
    pub(crate) fn delta(&self, net: &WeightedNetwork, i: usize, j: usize, new: f64) -> f64 {
        let old = net.weight(i, j);
        if old == new {
            return 0.0;
        }
        let toggled = f64::from(u8::from(tied(new))) - f64::from(u8::from(tied(old)));
        match *self {
            Term::Edges | Term::NonZero => toggled,
            Term::WeightSum => new - old,
            Term::EdgeCov(cov) => toggled * cov.weight(i, j),
            Term::Isolates => {
                let mut d = 0.0;
                for (v, other) in [(i, j), (j, i)] {
                    let row = net.row(v);
                    let rest = (0..net.n()).any(|m| m != other && tied(row[m]));
                    if !rest {
                        d += f64::from(u8::from(new == 0.0)) - f64::from(u8::from(old == 0.0));
                    }
                }
                d
            }
            Term::Gwesp { scale, ratio } => {
                if toggled == 0.0 {
                    return 0.0;
                }
                let sp = shared_partners(net, i, j, usize::MAX);
                let mut add = scale * (1.0 - ratio.powi(sp as i32));
                let (ri, rj) = (net.row(i), net.row(j));
                for k in 0..net.n() {
                    if k != i && k != j && tied(ri[k]) && tied(rj[k]) {
                        add += ratio.powi(shared_partners(net, i, k, j) as i32);
                        add += ratio.powi(shared_partners(net, j, k, i) as i32);
                    }
                }
                toggled * add
            }
            Term::TransitiveWeights => {
                let mut d = transitive_term(net, i, j, i, j, new) - transitive_term(net, i, j, i, j, old);
                for k in 0..net.n() {
                    if k == i || k == j {
                        continue;
                    }
                    for a in [i, j] {
                        d += transitive_term(net, a, k, i, j, new) - transitive_term(net, a, k, i, j, old);
                    }
                }
                d
            }
        }
    }
}

pub fn compute_statistics(
    net: &WeightedNetwork,
    covariates: &BTreeMap<String, WeightedNetwork>,
    specs: &[StatisticSpec],
) -> Result<Vec<f64>> {
    check_binary(specs, net)?;
    let terms = resolve(specs, covariates, net)?;
    Ok(terms.iter().map(|t| t.value(net)).collect())
}

/// GWESP: `e^a * sum_i {1 - (1 - e^-a)^i} p_i`, where `p_i`
/// counts tied pairs with exactly `i` shared partners.
pub fn gwesp(net: &WeightedNetwork, alpha: f64) -> Result<f64> {
    let spec = [StatisticSpec::Gwesp { alpha }];
    Ok(compute_statistics(net, &BTreeMap::new(), &spec)?[0])
}

pub fn change_statistics(
    net: &WeightedNetwork,
    covariates: &BTreeMap<String, WeightedNetwork>,
    specs: &[StatisticSpec],
    dyad: (usize, usize),
    new_weight: f64,
) -> Result<Vec<f64>> {
    let (i, j) = dyad;
    net.check_dyad(i, j)?;
    if !(new_weight >= 0.0 && new_weight.is_finite()) {
        return Err(Error::Validation(format!("new weight {new_weight} must be >= 0")));
    }
    check_binary(specs, net)?;
    if specs.iter().any(StatisticSpec::binary_only) && new_weight != 0.0 && new_weight != 1.0 {
        return Err(Error::ModeMismatch(format!("weight {new_weight} in a binary network")));
    }
    let terms = resolve(specs, covariates, net)?;
    Ok(terms.iter().map(|t| t.delta(net, i, j, new_weight)).collect())
}
