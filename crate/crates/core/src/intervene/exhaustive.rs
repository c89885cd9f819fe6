use rayon::prelude::*;

use super::{removal_sequence, replay, strictly_below, Budget, OptimizationResult, Strategy};
use crate::error::{Error, Result};
use crate::metrics::{cosine_from_parts, dyad_term, evaluate, predictor_layers, MetricSpec};
use crate::netcore::{apply_intervention, ChangeKind, NetworkState};

/// Maximum number of subsets evaluated before giving up.
pub const DEFAULT_EVALUATION_CAP: u64 = 20_000_000;

/// Sum over dyads that loses `cells[u][v]` whenever u or v is removed.
struct Channel {
    total: f64,
    rows: Vec<f64>,
    cells: Vec<f64>,
}

impl Channel {
    fn new(n: usize, total: f64, loss: impl Fn(usize, usize) -> f64) -> Self {
        let mut cells = vec![0.0; n * n];
        let mut rows = vec![0.0; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = loss(i, j);
                cells[i * n + j] = d;
                cells[j * n + i] = d;
                rows[i] += d;
                rows[j] += d;
            }
        }
        Self { total, rows, cells }
    }

    fn after(&self, n: usize, subset: &[usize]) -> f64 {
        let mut v = self.total;
        for (a, &u) in subset.iter().enumerate() {
            v -= self.rows[u];
            for &w in &subset[a + 1..] {
                v += self.cells[u * n + w];
            }
        }
        v
    }
}

enum SubsetMetric {
    Sum(Channel),
    Cosine { dot: Channel, norm: Channel, nb: f64 },
}

impl SubsetMetric {
    fn build(state: &NetworkState, metric: &MetricSpec, kind: ChangeKind) -> Result<Self> {
        let net = state.focal();
        let n = net.n();
        Ok(match metric {
            MetricSpec::TotalEdgeWeight => {
                SubsetMetric::Sum(Channel::new(n, net.total_weight(), |i, j| net.weight(i, j)))
            }
            MetricSpec::ExpectedDyadSum { model } => {
                let layers = predictor_layers(state, model)?;
                let left = match kind {
                    ChangeKind::RemoveNodeReplace => model.beta[0].exp(),
                    _ => 0.0,
                };
                let total = evaluate(metric, state)?;
                SubsetMetric::Sum(Channel::new(n, total, |i, j| dyad_term(model, &layers, i, j) - left))
            }
            MetricSpec::CosineDistanceToTarget { target } => {
                if kind == ChangeKind::RemoveNodeExcise {
                    return Err(Error::DimensionMismatch(
                        "excising a node changes the node set compared against the target".into(),
                    ));
                }
                evaluate(metric, state)?;
                let dot = Channel::new(n, 0.0, |i, j| net.weight(i, j) * target.weight(i, j));
                let norm = Channel::new(n, 0.0, |i, j| net.weight(i, j).powi(2));
                let with_totals = |mut c: Channel| {
                    c.total = c.rows.iter().sum::<f64>() / 2.0;
                    c
                };
                let nb = target.dyads().map(|(i, j)| target.weight(i, j).powi(2)).sum();
                SubsetMetric::Cosine {
                    dot: with_totals(dot),
                    norm: with_totals(norm),
                    nb,
                }
            }
        })
    }

    fn value(&self, n: usize, subset: &[usize]) -> f64 {
        match self {
            SubsetMetric::Sum(c) => c.after(n, subset),
            SubsetMetric::Cosine { dot, norm, nb } => {
                cosine_from_parts(dot.after(n, subset), norm.after(n, subset).max(0.0), *nb)
            }
        }
    }
}

/// Metric after removing `subset`, recomputed from scratch.
fn exact_value(state: &NetworkState, metric: &MetricSpec, kind: ChangeKind, subset: &[usize]) -> Result<f64> {
    if kind == ChangeKind::RemoveNodeExcise && subset.len() == state.n() {
        return Ok(0.0);
    }
    let mut current = state.clone();
    for iv in removal_sequence(kind, subset) {
        current = apply_intervention(&current, &iv)?.state;
    }
    evaluate(metric, &current)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Best (value, subset) over all `k`-subsets of `pool` whose first element
/// is `pool[first]`, scanned in lexicographic order.
fn best_with_first(metric: &SubsetMetric, n: usize, pool: &[usize], first: usize, k: usize) -> Option<(f64, Vec<usize>)> {
    let m = pool.len();
    if m - first < k {
        return None;
    }
    let mut idx: Vec<usize> = (first..first + k).collect();
    let mut subset: Vec<usize> = idx.iter().map(|&p| pool[p]).collect();
    let mut best = (metric.value(n, &subset), subset.clone());
    loop {
        // advance the tail (positions 1..k) to the next combination
        let mut pos = k;
        loop {
            if pos <= 1 {
                return Some(best);
            }
            pos -= 1;
            if idx[pos] < m - (k - pos) {
                break;
            }
        }
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
        for q in pos..k {
            subset[q] = pool[idx[q]];
        }
        let v = metric.value(n, &subset);
        if strictly_below(v, best.0) {
            best = (v, subset.clone());
        }
    }
}

/// Evaluates every node subset of size at most `units` and keeps a minimizer;
/// ties go to the lexicographically smallest subset. The trace holds the best
/// value found at each subset size.
pub fn exhaustive_optimize(
    state: &NetworkState,
    metric: &MetricSpec,
    budget: &Budget,
    cap: u64,
) -> Result<OptimizationResult> {
    budget.validate()?;
    metric.validate()?;
    if !budget.change.is_node_removal() {
        return Err(Error::UnsupportedChange(format!(
            "exhaustive search supports node removals only, not {}",
            budget.change
        )));
    }
    let n = state.n();
    let pool: Vec<usize> = (0..n)
        .filter(|&v| budget.change == ChangeKind::RemoveNodeExcise || !state.is_replaced(v))
        .collect();
    let max_size = budget.units.min(pool.len());
    let evaluations: u128 = (1..=max_size).map(|k| binomial(pool.len(), k)).fold(0, u128::saturating_add);
    if evaluations > cap as u128 {
        return Err(Error::Feasibility(format!(
            "{evaluations} subsets exceed the evaluation cap of {cap}"
        )));
    }

    let subset_metric = SubsetMetric::build(state, metric, budget.change)?;
    let mut best = (subset_metric.value(n, &[]), Vec::new());
    let mut trace = vec![evaluate(metric, state)?];
    for k in 1..=max_size {
        let per_first: Vec<Option<(f64, Vec<usize>)>> = (0..pool.len())
            .into_par_iter()
            .map(|first| best_with_first(&subset_metric, n, &pool, first, k))
            .collect();
        let mut size_best: Option<(f64, Vec<usize>)> = None;
        for cand in per_first.into_iter().flatten() {
            if size_best.as_ref().is_none_or(|b| strictly_below(cand.0, b.0)) {
                size_best = Some(cand);
            }
        }
        let size_best = size_best.expect("pool holds at least k nodes");
        trace.push(exact_value(state, metric, budget.change, &size_best.1)?);
        let tied = !strictly_below(best.0, size_best.0);
        if strictly_below(size_best.0, best.0) || (tied && size_best.1 < best.1) {
            best = size_best;
        }
    }

    let mut subset = best.1;
    if budget.change == ChangeKind::RemoveNodeExcise && subset.len() == n {
        // nothing is left to measure once n - 1 nodes are gone
        subset.pop();
    }
    let mut result = replay(
        Strategy::Exhaustive,
        state,
        metric,
        removal_sequence(budget.change, &subset),
    )?;
    result.trace = trace;
    Ok(result)
}
