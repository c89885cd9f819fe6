//! Budget-constrained search over interventions of a single change type.
//!
//! All strategies break ties in candidate enumeration order (lexicographic
//! by node or dyad), so results are reproducible.

mod exhaustive;
mod greedy;
mod heuristic;
mod random;

use serde::{Deserialize, Serialize};

pub use exhaustive::{exhaustive_optimize, DEFAULT_EVALUATION_CAP};
pub use greedy::greedy_optimize;
pub use heuristic::degree_heuristic;
pub use random::random_best;

use crate::error::{Error, Result};
use crate::metrics::{evaluate, MetricSpec};
use crate::netcore::{apply_intervention, ChangeKind, Intervention, NetworkState};

/// A caller-proposed attribute change, for `SetAttribute` budgets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeChange {
    pub node: usize,
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub units: usize,
    pub change: ChangeKind,
    /// Edge weight moved per unit (edge kinds only).
    #[serde(default = "default_unit_size")]
    pub unit_size: f64,
    #[serde(default)]
    pub attribute_candidates: Vec<AttributeChange>,
}

fn default_unit_size() -> f64 {
    1.0
}

impl Budget {
    pub fn new(units: usize, change: ChangeKind) -> Result<Self> {
        let budget = Self {
            units,
            change,
            unit_size: 1.0,
            attribute_candidates: Vec::new(),
        };
        budget.validate()?;
        Ok(budget)
    }

    pub fn with_unit_size(mut self, unit_size: f64) -> Result<Self> {
        self.unit_size = unit_size;
        self.validate()?;
        Ok(self)
    }

    pub fn with_attribute_candidates(mut self, candidates: Vec<AttributeChange>) -> Self {
        self.attribute_candidates = candidates;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.units == 0 {
            return Err(Error::InvalidBudget("budget must allow at least one unit".into()));
        }
        if !(self.unit_size > 0.0 && self.unit_size.is_finite()) {
            return Err(Error::InvalidBudget(format!(
                "unit size must be positive, got {}",
                self.unit_size
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Greedy,
    Exhaustive,
    DegreeHeuristic,
    RandomBest,
    DoNothing,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::Exhaustive => "exhaustive",
            Strategy::DegreeHeuristic => "degree-heuristic",
            Strategy::RandomBest => "random-best",
            Strategy::DoNothing => "do-nothing",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "greedy" => Strategy::Greedy,
            "exhaustive" => Strategy::Exhaustive,
            "degree-heuristic" | "degree" => Strategy::DegreeHeuristic,
            "random-best" | "random" => Strategy::RandomBest,
            "do-nothing" | "none" => Strategy::DoNothing,
            other => return Err(Error::Validation(format!("unknown strategy `{other}`"))),
        })
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub strategy: Strategy,
    /// In application order; indices refer to the state at application time.
    pub chosen: Vec<Intervention>,
    /// Label form of `chosen`.
    pub chosen_labels: Vec<String>,
    /// Metric after each unit spent; index 0 is the initial value.
    pub trace: Vec<f64>,
    pub metric_final: f64,
    pub final_state: NetworkState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChosenChange {
    pub kind: ChangeKind,
    pub target: String,
}

/// Serializable summary of an [`OptimizationResult`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub strategy: Strategy,
    pub metric: String,
    pub chosen: Vec<ChosenChange>,
    pub trace: Vec<f64>,
    pub metric_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl OptimizationResult {
    pub fn report(&self, metric: &MetricSpec, seed: Option<u64>, elapsed_seconds: Option<f64>) -> OptimizationReport {
        OptimizationReport {
            strategy: self.strategy,
            metric: metric.name().to_string(),
            chosen: self
                .chosen
                .iter()
                .zip(&self.chosen_labels)
                .map(|(iv, label)| ChosenChange {
                    kind: iv.kind(),
                    target: label.clone(),
                })
                .collect(),
            trace: self.trace.clone(),
            metric_final: self.metric_final,
            seed,
            elapsed_seconds,
        }
    }
}

/// Candidate unit changes of the budget's type, in lexicographic order.
pub fn enumerate_candidates(state: &NetworkState, budget: &Budget) -> Result<Vec<Intervention>> {
    let net = state.focal();
    let n = state.n();
    let out = match budget.change {
        ChangeKind::RemoveNodeExcise => {
            if n <= 1 {
                Vec::new()
            } else {
                (0..n).map(|node| Intervention::RemoveNodeExcise { node }).collect()
            }
        }
        ChangeKind::RemoveNodeReplace => (0..n)
            .filter(|&v| !state.is_replaced(v))
            .map(|node| Intervention::RemoveNodeReplace { node })
            .collect(),
        ChangeKind::AddEdgeUnit => net
            .dyads()
            .map(|(i, j)| Intervention::AddEdgeUnit {
                i,
                j,
                amount: budget.unit_size,
            })
            .collect(),
        ChangeKind::RemoveEdgeUnit => net
            .dyads()
            .filter(|&(i, j)| net.weight(i, j) >= budget.unit_size)
            .map(|(i, j)| Intervention::RemoveEdgeUnit {
                i,
                j,
                amount: budget.unit_size,
            })
            .collect(),
        ChangeKind::SetAttribute => {
            let mut c: Vec<Intervention> = budget
                .attribute_candidates
                .iter()
                .map(|a| Intervention::SetAttribute {
                    node: a.node,
                    name: a.name.clone(),
                    value: a.value,
                })
                .collect();
            for iv in &c {
                if let Intervention::SetAttribute { node, name, .. } = iv {
                    net.check_node(*node)?;
                    if !state.attributes().contains_key(name) {
                        return Err(Error::MissingAttribute(name.clone()));
                    }
                }
            }
            c.sort_by(|a, b| match (a, b) {
                (
                    Intervention::SetAttribute { node: n1, name: a1, value: v1 },
                    Intervention::SetAttribute { node: n2, name: a2, value: v2 },
                ) => (n1, a1).cmp(&(n2, a2)).then(v1.total_cmp(v2)),
                _ => std::cmp::Ordering::Equal,
            });
            c
        }
    };
    Ok(out)
}

/// Relative tolerance under which two metric values count as tied.
pub(crate) const TIE_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn strictly_below(candidate: f64, reference: f64) -> bool {
    candidate < reference - TIE_TOL * reference.abs().max(1.0)
}

/// Node-removal interventions for an ascending set of original indices.
pub(crate) fn removal_sequence(kind: ChangeKind, subset: &[usize]) -> Vec<Intervention> {
    subset
        .iter()
        .enumerate()
        .map(|(t, &v)| match kind {
            ChangeKind::RemoveNodeExcise => Intervention::RemoveNodeExcise { node: v - t },
            ChangeKind::RemoveNodeReplace => Intervention::RemoveNodeReplace { node: v },
            other => unreachable!("{other} is not a node removal"),
        })
        .collect()
}

/// Applies `chosen` in order, recording the metric after each step.
pub(crate) fn replay(
    strategy: Strategy,
    state: &NetworkState,
    metric: &MetricSpec,
    chosen: Vec<Intervention>,
) -> Result<OptimizationResult> {
    let mut current = state.clone();
    let mut trace = vec![evaluate(metric, &current)?];
    let mut labels = Vec::with_capacity(chosen.len());
    for iv in &chosen {
        labels.push(iv.describe(&current));
        current = apply_intervention(&current, iv)?.state;
        trace.push(evaluate(metric, &current)?);
    }
    Ok(OptimizationResult {
        strategy,
        chosen,
        chosen_labels: labels,
        metric_final: *trace.last().expect("trace has the initial value"),
        trace,
        final_state: current,
    })
}

/// The no-intervention baseline.
pub fn do_nothing(state: &NetworkState, metric: &MetricSpec) -> Result<OptimizationResult> {
    replay(Strategy::DoNothing, state, metric, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::WeightedNetwork;

    #[test]
    fn candidate_counts() {
        let state = NetworkState::new(WeightedNetwork::unlabeled(4));
        let add = Budget::new(1, ChangeKind::AddEdgeUnit).unwrap();
        assert_eq!(enumerate_candidates(&state, &add).unwrap().len(), 6);
        let remove = Budget::new(1, ChangeKind::RemoveEdgeUnit).unwrap();
        assert!(enumerate_candidates(&state, &remove).unwrap().is_empty());

        let state = NetworkState::new(WeightedNetwork::unlabeled(3));
        let state = apply_intervention(&state, &Intervention::RemoveNodeReplace { node: 1 })
            .unwrap()
            .state;
        let replace = Budget::new(1, ChangeKind::RemoveNodeReplace).unwrap();
        let c = enumerate_candidates(&state, &replace).unwrap();
        assert_eq!(
            c,
            vec![
                Intervention::RemoveNodeReplace { node: 0 },
                Intervention::RemoveNodeReplace { node: 2 }
            ]
        );
    }

    #[test]
    fn zero_budget_rejected() {
        assert!(matches!(Budget::new(0, ChangeKind::AddEdgeUnit), Err(Error::InvalidBudget(_))));
    }

    #[test]
    fn excise_sequence_shifts_indices() {
        let seq = removal_sequence(ChangeKind::RemoveNodeExcise, &[1, 3, 4]);
        assert_eq!(
            seq,
            vec![
                Intervention::RemoveNodeExcise { node: 1 },
                Intervention::RemoveNodeExcise { node: 2 },
                Intervention::RemoveNodeExcise { node: 2 },
            ]
        );
    }
}
