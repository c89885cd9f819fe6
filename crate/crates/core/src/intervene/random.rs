use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use super::{enumerate_candidates, removal_sequence, replay, Budget, OptimizationResult, Strategy};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, MetricSpec};
use crate::netcore::{apply_intervention, ChangeKind, Intervention, NetworkState};
use crate::rng::{substream, StreamRng};

fn draw_allocation(state: &NetworkState, budget: &Budget, rng: &mut StreamRng) -> Result<Vec<Intervention>> {
    let n = state.n();
    match budget.change {
        ChangeKind::RemoveNodeExcise | ChangeKind::RemoveNodeReplace => {
            let pool: Vec<usize> = (0..n)
                .filter(|&v| budget.change == ChangeKind::RemoveNodeExcise || !state.is_replaced(v))
                .collect();
            let limit = if budget.change == ChangeKind::RemoveNodeExcise {
                pool.len().saturating_sub(1)
            } else {
                pool.len()
            };
            let mut subset: Vec<usize> = sample(rng, pool.len(), budget.units.min(limit))
                .into_iter()
                .map(|p| pool[p])
                .collect();
            subset.sort_unstable();
            Ok(removal_sequence(budget.change, &subset))
        }
        ChangeKind::AddEdgeUnit | ChangeKind::SetAttribute => {
            let candidates = enumerate_candidates(state, budget)?;
            if candidates.is_empty() {
                return Ok(Vec::new());
            }
            Ok((0..budget.units)
                .map(|_| candidates[rng.random_range(0..candidates.len())].clone())
                .collect())
        }
        ChangeKind::RemoveEdgeUnit => {
            let mut current = state.clone();
            let mut chosen = Vec::new();
            for _ in 0..budget.units {
                let candidates = enumerate_candidates(&current, budget)?;
                if candidates.is_empty() {
                    break;
                }
                let iv = candidates[rng.random_range(0..candidates.len())].clone();
                current = apply_intervention(&current, &iv)?.state;
                chosen.push(iv);
            }
            Ok(chosen)
        }
    }
}

fn final_value(state: &NetworkState, metric: &MetricSpec, chosen: &[Intervention]) -> Result<f64> {
    let mut current = state.clone();
    for iv in chosen {
        current = apply_intervention(&current, iv)?.state;
    }
    evaluate(metric, &current)
}

/// Best of `draws` uniformly random budget allocations. Draw `d` uses its own
/// substream of `seed`, so the result does not depend on thread scheduling.
pub fn random_best(
    state: &NetworkState,
    metric: &MetricSpec,
    budget: &Budget,
    draws: usize,
    seed: u64,
) -> Result<OptimizationResult> {
    budget.validate()?;
    metric.validate()?;
    if draws == 0 {
        return Err(Error::Validation("random search needs at least one draw".into()));
    }
    let scored: Vec<(f64, Vec<Intervention>)> = (0..draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = substream(seed, "random-best", d as u64);
            let chosen = draw_allocation(state, budget, &mut rng)?;
            Ok((final_value(state, metric, &chosen)?, chosen))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (d, (v, _)) in scored.iter().enumerate() {
        if *v < scored[best].0 {
            best = d;
        }
    }
    let chosen = scored.into_iter().nth(best).expect("at least one draw").1;
    replay(Strategy::RandomBest, state, metric, chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervene::greedy::tests::counterexample;
    use crate::netcore::WeightedNetwork;

    #[test]
    fn reproducible_for_a_seed() {
        let budget = Budget::new(2, ChangeKind::RemoveNodeReplace).unwrap();
        let a = random_best(&counterexample(), &MetricSpec::TotalEdgeWeight, &budget, 1, 7).unwrap();
        let b = random_best(&counterexample(), &MetricSpec::TotalEdgeWeight, &budget, 1, 7).unwrap();
        assert_eq!(a.chosen, b.chosen);
        assert_eq!(a.chosen.len(), 2);
    }

    #[test]
    fn many_draws_reach_the_optimum_on_a_tiny_instance() {
        let budget = Budget::new(2, ChangeKind::RemoveNodeReplace).unwrap();
        let r = random_best(&counterexample(), &MetricSpec::TotalEdgeWeight, &budget, 200, 1).unwrap();
        assert_eq!(r.metric_final, 0.0);
    }

    #[test]
    fn edge_additions_spend_every_unit() {
        let budget = Budget::new(5, ChangeKind::AddEdgeUnit).unwrap();
        let state = NetworkState::new(WeightedNetwork::unlabeled(4));
        let r = random_best(&state, &MetricSpec::TotalEdgeWeight, &budget, 3, 2).unwrap();
        assert_eq!(r.final_state.focal().total_weight(), 5.0);
    }
}
