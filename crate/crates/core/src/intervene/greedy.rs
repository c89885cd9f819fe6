use rayon::prelude::*;

use super::{enumerate_candidates, strictly_below, Budget, OptimizationResult, Strategy};
use crate::error::Result;
use crate::metrics::{evaluate, MetricSpec, MetricTracker};
use crate::netcore::{apply_intervention, NetworkState};

/// Spends the budget one unit at a time on the change that lowers the metric
/// most. Removal budgets stop early once no candidate strictly improves.
pub fn greedy_optimize(state: &NetworkState, metric: &MetricSpec, budget: &Budget) -> Result<OptimizationResult> {
    budget.validate()?;
    metric.validate()?;
    let mut current = state.clone();
    let mut value = evaluate(metric, &current)?;
    let mut trace = vec![value];
    let mut chosen = Vec::new();
    let mut labels = Vec::new();

    for step in 0..budget.units {
        let candidates = enumerate_candidates(&current, budget)?;
        if candidates.is_empty() {
            log::debug!("greedy: no candidates left after {step} units");
            break;
        }
        let tracker = MetricTracker::new(metric, &current)?;
        let values: Vec<f64> = candidates
            .par_iter()
            .map(|iv| tracker.value_after(iv))
            .collect::<Result<_>>()?;
        let mut best = 0;
        for (k, &v) in values.iter().enumerate().skip(1) {
            if strictly_below(v, values[best]) {
                best = k;
            }
        }
        if budget.change.is_removal() && !strictly_below(values[best], value) {
            log::debug!("greedy: no improving removal after {step} units");
            break;
        }
        let iv = candidates[best].clone();
        labels.push(iv.describe(&current));
        current = apply_intervention(&current, &iv)?.state;
        value = evaluate(metric, &current)?;
        trace.push(value);
        chosen.push(iv);
    }

    Ok(OptimizationResult {
        strategy: Strategy::Greedy,
        chosen,
        chosen_labels: labels,
        metric_final: value,
        trace,
        final_state: current,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::netcore::{ChangeKind, Intervention, WeightedNetwork};

    pub(crate) fn counterexample() -> NetworkState {
        let labels = ["i", "j", "k", "a", "b"];
        let mut net = WeightedNetwork::empty(labels.iter().map(|s| s.to_string()).collect()).unwrap();
        net.set_weight(0, 1, 4.0);
        net.set_weight(0, 2, 4.0);
        net.set_weight(1, 3, 3.0);
        net.set_weight(2, 4, 3.0);
        NetworkState::new(net)
    }

    #[test]
    fn greedy_takes_the_hub_first() {
        let state = counterexample();
        let budget = Budget::new(2, ChangeKind::RemoveNodeReplace).unwrap();
        let r = greedy_optimize(&state, &MetricSpec::TotalEdgeWeight, &budget).unwrap();
        assert_eq!(r.chosen_labels, vec!["i", "j"]);
        assert_eq!(r.trace, vec![14.0, 6.0, 3.0]);
    }

    #[test]
    fn cosine_additions_pile_onto_the_target_dyad() {
        let mut target = WeightedNetwork::unlabeled(4);
        target.set_weight(1, 3, 2.0);
        let metric = MetricSpec::CosineDistanceToTarget { target };
        let budget = Budget::new(4, ChangeKind::AddEdgeUnit).unwrap();
        let r = greedy_optimize(&NetworkState::new(WeightedNetwork::unlabeled(4)), &metric, &budget).unwrap();
        assert!(r.chosen.iter().all(|iv| *iv == Intervention::AddEdgeUnit { i: 1, j: 3, amount: 1.0 }));
        assert_eq!(r.trace[0], 1.0);
        assert!(r.trace[1..].iter().all(|v| v.abs() < 1e-12));
        assert_eq!(r.final_state.focal().weight(1, 3), 4.0);
    }

    #[test]
    fn removal_stops_when_nothing_improves() {
        let mut net = WeightedNetwork::unlabeled(4);
        net.set_weight(0, 1, 1.0);
        let budget = Budget::new(3, ChangeKind::RemoveNodeReplace).unwrap();
        let r = greedy_optimize(&NetworkState::new(net), &MetricSpec::TotalEdgeWeight, &budget).unwrap();
        assert_eq!(r.chosen, vec![Intervention::RemoveNodeReplace { node: 0 }]);
        assert_eq!(r.trace, vec![1.0, 0.0]);
    }

    #[test]
    fn edge_additions_spend_the_whole_budget() {
        let budget = Budget::new(3, ChangeKind::AddEdgeUnit).unwrap();
        let r = greedy_optimize(
            &NetworkState::new(WeightedNetwork::unlabeled(3)),
            &MetricSpec::TotalEdgeWeight,
            &budget,
        )
        .unwrap();
        assert_eq!(r.chosen.len(), 3);
        assert_eq!(r.trace, vec![0.0, 1.0, 2.0, 3.0]);
    }
}
