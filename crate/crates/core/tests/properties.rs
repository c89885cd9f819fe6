use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use netmod_core::ergm::{change_statistics, compute_statistics, ErgmModel, Sampler, StatisticSpec};
use netmod_core::evolve::{run_evolution, EvolutionConfig};
use netmod_core::intervene::{
    do_nothing, exhaustive_optimize, greedy_optimize, random_best, Budget, DEFAULT_EVALUATION_CAP,
};
use netmod_core::metrics::{evaluate, MetricSpec};
use netmod_core::netcore::io::{read_square_matrix, write_square_matrix};
use netmod_core::netcore::{apply_intervention, project_bipartite, ChangeKind, Incidence, Intervention};
use netmod_core::{DyadicModel, NetworkState, WeightedNetwork};

/// Symmetric network with weights in 0..=max on n nodes.
fn network(n_range: std::ops::RangeInclusive<usize>, max: u32) -> impl Strategy<Value = WeightedNetwork> {
    n_range.prop_flat_map(move |n| {
        prop::collection::vec(0..=max, n * (n - 1) / 2).prop_map(move |cells| {
            let mut net = WeightedNetwork::unlabeled(n);
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    net.set_weight(i, j, f64::from(cells[k]));
                    k += 1;
                }
            }
            net
        })
    })
}

fn with_covariate(net: WeightedNetwork, seed: u64) -> NetworkState {
    let n = net.n();
    let mut cov = WeightedNetwork::unlabeled(n);
    for i in 0..n {
        for j in (i + 1)..n {
            cov.set_weight(i, j, ((i * 7 + j * 3 + seed as usize) % 3) as f64);
        }
    }
    NetworkState::new(net).with_covariate("x", cov).unwrap()
}

fn dyadic() -> MetricSpec {
    MetricSpec::ExpectedDyadSum {
        model: DyadicModel::from_coefficients(vec![-1.0, 0.4, 0.3], 1.0, vec!["focal".into(), "x".into()]).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn matrix_csv_round_trips(net in network(1..=8, 9)) {
        let mut buf = Vec::new();
        write_square_matrix(&net, &mut buf).unwrap();
        let back = read_square_matrix(buf.as_slice()).unwrap();
        prop_assert_eq!(back, net);
    }

    #[test]
    fn projection_is_symmetric_with_empty_diagonal(
        rows in prop::collection::vec(prop::collection::vec(0u8..=1, 4), 2..8)
    ) {
        let inc = Incidence {
            roles: (0..4).map(|r| format!("r{r}")).collect(),
            rows: rows.iter().map(|r| r.iter().map(|&v| f64::from(v)).collect()).collect(),
        };
        let net = project_bipartite(&inc).unwrap();
        for i in 0..net.n() {
            prop_assert_eq!(net.weight(i, i), 0.0);
            for j in 0..net.n() {
                prop_assert_eq!(net.weight(i, j), net.weight(j, i));
                if i != j {
                    let shared: f64 = inc.rows.iter().map(|row| row[i] * row[j]).sum();
                    prop_assert_eq!(net.weight(i, j), shared);
                }
            }
        }
    }

    #[test]
    fn removal_kinds_keep_or_shrink_order(net in network(2..=7, 3), pick in 0usize..7) {
        let state = with_covariate(net, 1);
        let v = pick % state.n();
        let replaced = apply_intervention(&state, &Intervention::RemoveNodeReplace { node: v }).unwrap().state;
        prop_assert_eq!(replaced.n(), state.n());
        prop_assert!(replaced.focal().row(v).iter().all(|&w| w == 0.0));
        prop_assert!(replaced.layer("x").unwrap().row(v).iter().all(|&w| w == 0.0));
        let excised = apply_intervention(&state, &Intervention::RemoveNodeExcise { node: v }).unwrap().state;
        prop_assert_eq!(excised.n(), state.n() - 1);
        prop_assert!(excised.focal().index_of(state.focal().label(v)).is_none());
    }

    #[test]
    fn greedy_trace_is_consistent(net in network(3..=8, 4), units in 1usize..4, metric_pick in 0u8..2) {
        let state = with_covariate(net, 2);
        let metric = if metric_pick == 0 { MetricSpec::TotalEdgeWeight } else { dyadic() };
        let budget = Budget::new(units, ChangeKind::RemoveNodeReplace).unwrap();
        let g = greedy_optimize(&state, &metric, &budget).unwrap();
        prop_assert_eq!(g.trace[0], evaluate(&metric, &state).unwrap());
        prop_assert_eq!(*g.trace.last().unwrap(), g.metric_final);
        prop_assert!(g.trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        let replayed = evaluate(&metric, &g.final_state).unwrap();
        prop_assert!((replayed - g.metric_final).abs() <= 1e-9 * replayed.abs().max(1.0));
    }

    #[test]
    fn exhaustive_never_worse_than_other_strategies(net in network(3..=7, 4), units in 1usize..4, seed in any::<u64>()) {
        let state = with_covariate(net, 3);
        let metric = dyadic();
        let budget = Budget::new(units, ChangeKind::RemoveNodeReplace).unwrap();
        let e = exhaustive_optimize(&state, &metric, &budget, DEFAULT_EVALUATION_CAP).unwrap();
        let g = greedy_optimize(&state, &metric, &budget).unwrap();
        let r = random_best(&state, &metric, &budget, 10, seed).unwrap();
        let d = do_nothing(&state, &metric).unwrap();
        let tol = 1e-9 * d.metric_final.max(1.0);
        prop_assert!(e.metric_final <= g.metric_final + tol);
        prop_assert!(e.metric_final <= r.metric_final + tol);
        prop_assert!(g.metric_final <= d.metric_final + tol);
    }

    #[test]
    fn random_best_is_reproducible(net in network(3..=7, 3), seed in any::<u64>()) {
        let state = with_covariate(net, 4);
        let budget = Budget::new(2, ChangeKind::RemoveNodeExcise).unwrap();
        let a = random_best(&state, &MetricSpec::TotalEdgeWeight, &budget, 8, seed).unwrap();
        let b = random_best(&state, &MetricSpec::TotalEdgeWeight, &budget, 8, seed).unwrap();
        prop_assert_eq!(a.chosen_labels, b.chosen_labels);
        prop_assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn change_statistics_match_recompute(net in network(3..=8, 1), i in 0usize..8, j in 0usize..8) {
        let n = net.n();
        let (i, j) = (i % n, j % n);
        prop_assume!(i != j);
        let (i, j) = (i.min(j), i.max(j));
        let specs = vec![
            StatisticSpec::Edges,
            StatisticSpec::Isolates,
            StatisticSpec::Gwesp { alpha: 0.5 },
            StatisticSpec::TransitiveWeights,
        ];
        let covs = BTreeMap::new();
        let new = 1.0 - net.weight(i, j);
        let delta = change_statistics(&net, &covs, &specs, (i, j), new).unwrap();
        let before = compute_statistics(&net, &covs, &specs).unwrap();
        let mut after_net = net.clone();
        after_net.set_weight(i, j, new);
        let after = compute_statistics(&after_net, &covs, &specs).unwrap();
        for k in 0..specs.len() {
            prop_assert!((after[k] - before[k] - delta[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn valued_sweeps_stay_in_range(net in network(3..=7, 3), seed in any::<u64>()) {
        let model = ErgmModel::valued(vec![StatisticSpec::WeightSum, StatisticSpec::NonZero], vec![-0.2, 0.5], 3).unwrap();
        let covs = BTreeMap::new();
        let mut g = net;
        let sampler = Sampler::new(&model, &covs, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            sampler.sweep(&mut g, &mut rng);
        }
        for i in 0..g.n() {
            prop_assert_eq!(g.weight(i, i), 0.0);
            for j in 0..g.n() {
                let w = g.weight(i, j);
                prop_assert!((0.0..=3.0).contains(&w) && w.fract() == 0.0);
                prop_assert_eq!(w, g.weight(j, i));
            }
        }
    }
}

#[test]
fn evolution_starts_at_the_observed_value() {
    let mut net = WeightedNetwork::unlabeled(8);
    for i in 0..7 {
        net.set_weight(i, i + 1, 1.0);
    }
    let state = with_covariate(net, 5);
    let model = ErgmModel::binary(vec![StatisticSpec::Edges], vec![-1.0]).unwrap();
    let metric = dyadic();
    let cfg = EvolutionConfig::new(10, 12, 99).unwrap();
    let a = run_evolution(&state, &model, &metric, &cfg).unwrap();
    let b = run_evolution(&state, &model, &metric, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.mean.len(), 11);
    assert_eq!(a.mean[0], evaluate(&metric, &state).unwrap());
    assert_eq!(a.sd[0], 0.0);
    assert!(a.sd.iter().all(|s| *s >= 0.0));
}
