//! Graph metric functions to be minimized.
//!
//! [`MetricTracker`] evaluates the metric after a single candidate change
//! without rebuilding the state, in O(n) for node removals and O(1) for
//! edge changes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadreg::DyadicModel;
use crate::error::{Error, Result};
use crate::netcore::{Intervention, NetworkState, WeightedNetwork};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricSpec {
    /// Sum over dyads of the dyadic model's expected response. The model's
    /// predictor names are looked up as layers of the state.
    ExpectedDyadSum { model: DyadicModel },
    /// `1 - cos(A, target)` over the vectorized weight matrices.
    CosineDistanceToTarget { target: WeightedNetwork },
    /// Sum of upper-triangle weights of the focal network.
    TotalEdgeWeight,
}

impl MetricSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MetricSpec::ExpectedDyadSum { .. } => "expected-dyad-sum",
            MetricSpec::CosineDistanceToTarget { .. } => "cosine-distance",
            MetricSpec::TotalEdgeWeight => "total-weight",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MetricSpec::ExpectedDyadSum { model } => model.validate(),
            MetricSpec::CosineDistanceToTarget { target } => {
                if target.frobenius_norm() > 0.0 {
                    Ok(())
                } else {
                    Err(Error::ZeroTarget)
                }
            }
            MetricSpec::TotalEdgeWeight => Ok(()),
        }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How removed nodes enter [`expected_dyad_sum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalSemantics {
    /// Dyads touching a removed node contribute nothing.
    Excise,
    /// Dyads touching a removed node contribute `exp(b0)`: every covariate
    /// of the replacement is zero.
    Replace,
}

pub(crate) fn predictor_layers<'a>(state: &'a NetworkState, model: &DyadicModel) -> Result<Vec<&'a WeightedNetwork>> {
    model.validate()?;
    model
        .predictor_names
        .iter()
        .map(|name| state.layer(name))
        .collect()
}

#[inline]
pub(crate) fn dyad_term(model: &DyadicModel, layers: &[&WeightedNetwork], i: usize, j: usize) -> f64 {
    let mut eta = model.beta[0];
    for (b, layer) in model.beta[1..].iter().zip(layers) {
        eta += b * layer.weight(i, j);
    }
    eta.exp()
}

pub fn expected_dyad_sum(
    state: &NetworkState,
    model: &DyadicModel,
    removed: &[usize],
    semantics: RemovalSemantics,
) -> Result<f64> {
    let layers = predictor_layers(state, model)?;
    let n = state.n();
    let mut gone = vec![false; n];
    for &v in removed {
        state.focal().check_node(v)?;
        gone[v] = true;
    }
    let replaced_term = model.beta[0].exp();
    let mut total = 0.0;
    for (i, j) in state.focal().dyads() {
        total += if gone[i] || gone[j] {
            match semantics {
                RemovalSemantics::Excise => 0.0,
                RemovalSemantics::Replace => replaced_term,
            }
        } else {
            dyad_term(model, &layers, i, j)
        };
    }
    Ok(total)
}

fn cosine_parts(a: &WeightedNetwork, target: &WeightedNetwork) -> Result<(f64, f64, f64)> {
    if !a.same_layout(target) {
        return Err(Error::DimensionMismatch(
            "network and target have different node sets".into(),
        ));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (i, j) in a.dyads() {
        let (x, y) = (a.weight(i, j), target.weight(i, j));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if nb <= 0.0 {
        return Err(Error::ZeroTarget);
    }
    Ok((dot, na, nb))
}

pub(crate) fn cosine_from_parts(dot: f64, na: f64, nb: f64) -> f64 {
    if na <= 0.0 {
        return 1.0;
    }
    (1.0 - dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0)
}

/// `1 - cosine similarity`; an all-zero `a` is maximally distant (1).
pub fn cosine_distance(a: &WeightedNetwork, target: &WeightedNetwork) -> Result<f64> {
    let (dot, na, nb) = cosine_parts(a, target)?;
    Ok(cosine_from_parts(dot, na, nb))
}

/// Metric of `state` with its focal network swapped for `focal`, without
/// rebuilding the state. Covariate layers are read from `state`.
pub fn evaluate_with_focal(spec: &MetricSpec, state: &NetworkState, focal: &WeightedNetwork) -> Result<f64> {
    if !focal.same_layout(state.focal()) {
        return Err(Error::DimensionMismatch(
            "replacement focal network has a different node set".into(),
        ));
    }
    match spec {
        MetricSpec::ExpectedDyadSum { model } => {
            model.validate()?;
            let layers = model
                .predictor_names
                .iter()
                .map(|name| {
                    if name == state.focal_name() {
                        Ok(focal)
                    } else {
                        state.layer(name)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(focal.dyads().map(|(i, j)| dyad_term(model, &layers, i, j)).sum())
        }
        MetricSpec::CosineDistanceToTarget { target } => cosine_distance(focal, target),
        MetricSpec::TotalEdgeWeight => Ok(focal.total_weight()),
    }
}

pub fn evaluate(spec: &MetricSpec, state: &NetworkState) -> Result<f64> {
    match spec {
        MetricSpec::ExpectedDyadSum { model } => {
            expected_dyad_sum(state, model, &[], RemovalSemantics::Excise)
        }
        MetricSpec::CosineDistanceToTarget { target } => cosine_distance(state.focal(), target),
        MetricSpec::TotalEdgeWeight => Ok(state.focal().total_weight()),
    }
}

enum Cache<'a> {
    Total,
    Dyad {
        terms: Vec<f64>,
        replaced_term: f64,
        focal_coef: f64,
    },
    Cosine {
        target: &'a WeightedNetwork,
        dot: f64,
        na: f64,
        nb: f64,
    },
}

/// Metric value of a fixed state plus cheap look-ahead over single changes.
pub struct MetricTracker<'a> {
    state: &'a NetworkState,
    value: f64,
    cache: Cache<'a>,
}

impl<'a> MetricTracker<'a> {
    pub fn new(spec: &'a MetricSpec, state: &'a NetworkState) -> Result<Self> {
        let (value, cache) = match spec {
            MetricSpec::TotalEdgeWeight => (state.focal().total_weight(), Cache::Total),
            MetricSpec::ExpectedDyadSum { model } => {
                let layers = predictor_layers(state, model)?;
                let n = state.n();
                let mut terms = vec![0.0; n * n];
                let mut value = 0.0;
                for (i, j) in state.focal().dyads() {
                    let t = dyad_term(model, &layers, i, j);
                    terms[i * n + j] = t;
                    terms[j * n + i] = t;
                    value += t;
                }
                let focal_coef = model
                    .predictor_names
                    .iter()
                    .zip(&model.beta[1..])
                    .filter(|(name, _)| name.as_str() == state.focal_name())
                    .map(|(_, b)| b)
                    .sum();
                (
                    value,
                    Cache::Dyad {
                        terms,
                        replaced_term: model.beta[0].exp(),
                        focal_coef,
                    },
                )
            }
            MetricSpec::CosineDistanceToTarget { target } => {
                let (dot, na, nb) = cosine_parts(state.focal(), target)?;
                (cosine_from_parts(dot, na, nb), Cache::Cosine { target, dot, na, nb })
            }
        };
        Ok(Self { state, value, cache })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Metric of the state after applying `iv`, without applying it.
    pub fn value_after(&self, iv: &Intervention) -> Result<f64> {
        let net = self.state.focal();
        let n = net.n();
        match iv {
            Intervention::RemoveNodeExcise { node } | Intervention::RemoveNodeReplace { node } => {
                net.check_node(*node)?
            }
            Intervention::AddEdgeUnit { i, j, .. } | Intervention::RemoveEdgeUnit { i, j, .. } => {
                net.check_dyad(*i, *j)?
            }
            Intervention::SetAttribute { node, .. } => net.check_node(*node)?,
        }
        // new focal weight at an edited dyad
        let edge_delta = |i: usize, j: usize| -> (f64, f64) {
            let old = net.weight(i, j);
            let new = match iv {
                Intervention::AddEdgeUnit { amount, .. } => old + amount,
                Intervention::RemoveEdgeUnit { amount, .. } => (old - amount).max(0.0),
                _ => old,
            };
            (old, new)
        };
        let value = match (&self.cache, iv) {
            (_, Intervention::SetAttribute { .. }) => self.value,

            (Cache::Total, Intervention::RemoveNodeExcise { node } | Intervention::RemoveNodeReplace { node }) => {
                self.value - net.row(*node).iter().sum::<f64>()
            }
            (Cache::Total, Intervention::AddEdgeUnit { i, j, .. } | Intervention::RemoveEdgeUnit { i, j, .. }) => {
                let (old, new) = edge_delta(*i, *j);
                self.value + (new - old)
            }

            (Cache::Dyad { terms, .. }, Intervention::RemoveNodeExcise { node }) => {
                self.value - terms[node * n..(node + 1) * n].iter().sum::<f64>()
            }
            (Cache::Dyad { terms, replaced_term, .. }, Intervention::RemoveNodeReplace { node }) => {
                let row = &terms[node * n..(node + 1) * n];
                let delta: f64 = (0..n)
                    .filter(|&j| j != *node)
                    .map(|j| replaced_term - row[j])
                    .sum();
                self.value + delta
            }
            (
                Cache::Dyad { terms, focal_coef, .. },
                Intervention::AddEdgeUnit { i, j, .. } | Intervention::RemoveEdgeUnit { i, j, .. },
            ) => {
                let (old, new) = edge_delta(*i, *j);
                if *focal_coef == 0.0 || old == new {
                    self.value
                } else {
                    let t = terms[i * n + j];
                    self.value + t * ((focal_coef * (new - old)).exp() - 1.0)
                }
            }

            (Cache::Cosine { .. }, Intervention::RemoveNodeExcise { .. }) => {
                return Err(Error::DimensionMismatch(
                    "excising a node changes the node set compared against the target".into(),
                ))
            }
            (Cache::Cosine { target, dot, na, nb }, Intervention::RemoveNodeReplace { node }) => {
                let (mut d, mut a) = (*dot, *na);
                for j in (0..n).filter(|&j| j != *node) {
                    let x = net.weight(*node, j);
                    d -= x * target.weight(*node, j);
                    a -= x * x;
                }
                cosine_from_parts(d, a.max(0.0), *nb)
            }
            (
                Cache::Cosine { target, dot, na, nb },
                Intervention::AddEdgeUnit { i, j, .. } | Intervention::RemoveEdgeUnit { i, j, .. },
            ) => {
                let (old, new) = edge_delta(*i, *j);
                let d = dot + (new - old) * target.weight(*i, *j);
                let a = na + (new * new - old * old);
                cosine_from_parts(d, a.max(0.0), *nb)
            }
        };
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::apply_intervention;

    fn model(beta: Vec<f64>, names: &[&str]) -> DyadicModel {
        DyadicModel::from_coefficients(beta, 1.0, names.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn replacement_contributes_exp_intercept() {
        let state = NetworkState::new(WeightedNetwork::unlabeled(2));
        let m = model(vec![-6.6235], &[]);
        let v = expected_dyad_sum(&state, &m, &[0], RemovalSemantics::Replace).unwrap();
        assert!((v - 1.33e-3).abs() < 0.01e-3);
    }

    #[test]
    fn excising_everything_gives_zero() {
        let state = NetworkState::new(WeightedNetwork::unlabeled(4));
        let m = model(vec![1.0], &[]);
        assert_eq!(
            expected_dyad_sum(&state, &m, &[0, 1, 2, 3], RemovalSemantics::Excise).unwrap(),
            0.0
        );
    }

    #[test]
    fn hand_evaluated_three_node_sum() {
        let mut x = WeightedNetwork::unlabeled(3);
        x.set_weight(0, 1, 2f64.ln());
        let state = NetworkState::new(WeightedNetwork::unlabeled(3))
            .with_covariate("x", x)
            .unwrap();
        let m = model(vec![0.0, 1.0], &["x"]);
        let v = expected_dyad_sum(&state, &m, &[], RemovalSemantics::Excise).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        assert!(matches!(
            expected_dyad_sum(&state, &model(vec![0.0, 1.0], &["kin"]), &[], RemovalSemantics::Excise),
            Err(Error::MissingCovariate(_))
        ));
    }

    #[test]
    fn cosine_examples() {
        let mut t = WeightedNetwork::unlabeled(5);
        t.set_weight(1, 2, 3.0);
        t.set_weight(0, 4, 1.0);
        assert!(cosine_distance(&t, &t).unwrap().abs() < 1e-12);
        let mut doubled = t.clone();
        doubled.set_weight(1, 2, 6.0);
        doubled.set_weight(0, 4, 2.0);
        assert!(cosine_distance(&doubled, &t).unwrap().abs() < 1e-12);

        let mut a = WeightedNetwork::unlabeled(5);
        a.set_weight(1, 2, 1.0);
        let mut b = WeightedNetwork::unlabeled(5);
        b.set_weight(3, 4, 1.0);
        assert_eq!(cosine_distance(&a, &b).unwrap(), 1.0);
        assert_eq!(cosine_distance(&WeightedNetwork::unlabeled(5), &b).unwrap(), 1.0);
        assert!(matches!(cosine_distance(&b, &WeightedNetwork::unlabeled(5)), Err(Error::ZeroTarget)));
        assert!(matches!(
            cosine_distance(&b, &WeightedNetwork::unlabeled(4)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn evaluate_dispatch() {
        let state = NetworkState::new(WeightedNetwork::unlabeled(3));
        assert_eq!(evaluate(&MetricSpec::TotalEdgeWeight, &state).unwrap(), 0.0);
        let mut t = WeightedNetwork::unlabeled(3);
        t.set_weight(0, 1, 1.0);
        let s2 = NetworkState::new(t.clone());
        let spec = MetricSpec::CosineDistanceToTarget { target: t };
        assert!(evaluate(&spec, &s2).unwrap().abs() < 1e-12);
        let m = model(vec![0.3], &[]);
        let spec = MetricSpec::ExpectedDyadSum { model: m.clone() };
        assert_eq!(
            evaluate(&spec, &state).unwrap(),
            expected_dyad_sum(&state, &m, &[], RemovalSemantics::Excise).unwrap()
        );
    }

    fn rich_state() -> NetworkState {
        let mut focal = WeightedNetwork::unlabeled(5);
        let mut cov = WeightedNetwork::unlabeled(5);
        let mut k = 0.0;
        for (i, j) in focal.clone().dyads() {
            k += 1.0;
            focal.set_weight(i, j, (k * 0.7) % 3.0);
            cov.set_weight(i, j, (k * 1.3) % 2.0);
        }
        NetworkState::new(focal)
            .with_focal_name("comm")
            .unwrap()
            .with_covariate("org", cov)
            .unwrap()
    }

    #[test]
    fn tracker_matches_full_recompute() {
        let state = rich_state();
        let mut target = WeightedNetwork::unlabeled(5);
        target.set_weight(0, 3, 2.0);
        target.set_weight(2, 4, 1.0);
        let specs = vec![
            MetricSpec::TotalEdgeWeight,
            MetricSpec::ExpectedDyadSum { model: model(vec![-1.0, 0.4, 0.9], &["comm", "org"]) },
            MetricSpec::CosineDistanceToTarget { target },
        ];
        let mut ivs = Vec::new();
        for v in 0..5 {
            ivs.push(Intervention::RemoveNodeReplace { node: v });
            ivs.push(Intervention::RemoveNodeExcise { node: v });
        }
        for (i, j) in state.focal().dyads() {
            ivs.push(Intervention::AddEdgeUnit { i, j, amount: 1.5 });
            ivs.push(Intervention::RemoveEdgeUnit { i, j, amount: 1.0 });
        }
        for spec in &specs {
            let tracker = MetricTracker::new(spec, &state).unwrap();
            assert!((tracker.value() - evaluate(spec, &state).unwrap()).abs() < 1e-12);
            for iv in &ivs {
                let next = apply_intervention(&state, iv).unwrap().state;
                match (tracker.value_after(iv), evaluate(spec, &next)) {
                    (Ok(fast), Ok(full)) => assert!((fast - full).abs() < 1e-9, "{spec} {iv:?}"),
                    (Err(_), Err(_)) => {}
                    (a, b) => panic!("{spec} {iv:?}: {a:?} vs {b:?}"),
                }
            }
        }
    }
}
