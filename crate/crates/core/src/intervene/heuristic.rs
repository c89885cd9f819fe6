use super::{replay, Budget, OptimizationResult, Strategy};
use crate::error::{Error, Result};
use crate::metrics::MetricSpec;
use crate::netcore::{ChangeKind, Intervention, NetworkState};

/// Removes the `units` nodes of highest weighted degree on layer `network`
/// (the focal network or a covariate), highest first, ties to the lower index.
/// Degrees are ranked once, on the initial state.
pub fn degree_heuristic(
    state: &NetworkState,
    metric: &MetricSpec,
    budget: &Budget,
    network: &str,
) -> Result<OptimizationResult> {
    budget.validate()?;
    let excise = match budget.change {
        ChangeKind::RemoveNodeExcise => true,
        ChangeKind::RemoveNodeReplace => false,
        other => {
            return Err(Error::UnsupportedChange(format!(
                "the degree heuristic removes nodes, not {other}"
            )))
        }
    };
    let layer = state.layer(network)?;
    let mut ranked: Vec<(usize, f64)> = (0..state.n())
        .filter(|&v| !state.is_replaced(v))
        .map(|v| Ok((v, layer.weighted_degree(v)?)))
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let limit = if excise { ranked.len().saturating_sub(1) } else { ranked.len() };
    ranked.truncate(budget.units.min(limit));

    let mut chosen = Vec::with_capacity(ranked.len());
    for (t, &(v, _)) in ranked.iter().enumerate() {
        chosen.push(if excise {
            let shift = ranked[..t].iter().filter(|&&(u, _)| u < v).count();
            Intervention::RemoveNodeExcise { node: v - shift }
        } else {
            Intervention::RemoveNodeReplace { node: v }
        });
    }
    replay(Strategy::DegreeHeuristic, state, metric, chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::WeightedNetwork;

    #[test]
    fn star_hub_goes_first() {
        let mut net = WeightedNetwork::unlabeled(5);
        for leaf in 1..5 {
            net.set_weight(0, leaf, 1.0);
        }
        let state = NetworkState::new(net);
        let budget = Budget::new(1, ChangeKind::RemoveNodeReplace).unwrap();
        let r = degree_heuristic(&state, &MetricSpec::TotalEdgeWeight, &budget, "focal").unwrap();
        assert_eq!(r.chosen, vec![Intervention::RemoveNodeReplace { node: 0 }]);
        assert_eq!(r.metric_final, 0.0);
    }

    #[test]
    fn equal_degrees_fall_back_to_index_and_excise_shifts() {
        let mut net = WeightedNetwork::unlabeled(4);
        for (i, j) in net.clone().dyads() {
            net.set_weight(i, j, 1.0);
        }
        let state = NetworkState::new(net);
        let budget = Budget::new(2, ChangeKind::RemoveNodeExcise).unwrap();
        let r = degree_heuristic(&state, &MetricSpec::TotalEdgeWeight, &budget, "focal").unwrap();
        assert_eq!(r.chosen_labels, vec!["0", "1"]);
        assert_eq!(r.trace, vec![6.0, 3.0, 1.0]);
        assert!(matches!(
            degree_heuristic(&state, &MetricSpec::TotalEdgeWeight, &budget, "kin"),
            Err(Error::MissingCovariate(_))
        ));
    }
}
