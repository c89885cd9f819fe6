use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::state::NetworkState;
use crate::error::{Error, Result};

/// The change types an intervention can make.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChangeKind {
    /// Delete the node; `n` shrinks by one.
    RemoveNodeExcise,
    /// Zero the node's ties, covariates and attributes; `n` is unchanged.
    RemoveNodeReplace,
    AddEdgeUnit,
    RemoveEdgeUnit,
    SetAttribute,
}

impl ChangeKind {
    pub fn is_node_removal(self) -> bool {
        matches!(self, ChangeKind::RemoveNodeExcise | ChangeKind::RemoveNodeReplace)
    }

    pub fn is_removal(self) -> bool {
        self.is_node_removal() || self == ChangeKind::RemoveEdgeUnit
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChangeKind::RemoveNodeExcise => "remove-node-excise",
            ChangeKind::RemoveNodeReplace => "remove-node-replace",
            ChangeKind::AddEdgeUnit => "add-edge-unit",
            ChangeKind::RemoveEdgeUnit => "remove-edge-unit",
            ChangeKind::SetAttribute => "set-attribute",
        }
    }
}

impl fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChangeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "remove-node-excise" => ChangeKind::RemoveNodeExcise,
            "remove-node-replace" => ChangeKind::RemoveNodeReplace,
            "add-edge-unit" => ChangeKind::AddEdgeUnit,
            "remove-edge-unit" => ChangeKind::RemoveEdgeUnit,
            "set-attribute" => ChangeKind::SetAttribute,
            "add-node" => {
                return Err(Error::UnsupportedChange(
                    "node addition is not optimizable".into(),
                ))
            }
            other => return Err(Error::Validation(format!("unknown change type `{other}`"))),
        })
    }
}

/// One unit change. Node and dyad indices refer to the state the
/// intervention is applied to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Intervention {
    RemoveNodeExcise { node: usize },
    RemoveNodeReplace { node: usize },
    AddEdgeUnit { i: usize, j: usize, amount: f64 },
    RemoveEdgeUnit { i: usize, j: usize, amount: f64 },
    SetAttribute { node: usize, name: String, value: f64 },
}

impl Intervention {
    pub fn kind(&self) -> ChangeKind {
        match self {
            Intervention::RemoveNodeExcise { .. } => ChangeKind::RemoveNodeExcise,
            Intervention::RemoveNodeReplace { .. } => ChangeKind::RemoveNodeReplace,
            Intervention::AddEdgeUnit { .. } => ChangeKind::AddEdgeUnit,
            Intervention::RemoveEdgeUnit { .. } => ChangeKind::RemoveEdgeUnit,
            Intervention::SetAttribute { .. } => ChangeKind::SetAttribute,
        }
    }

    /// Human-readable target using the state's labels.
    pub fn describe(&self, state: &NetworkState) -> String {
        let label = |v: usize| {
            state
                .focal()
                .labels()
                .get(v)
                .cloned()
                .unwrap_or_else(|| format!("#{v}"))
        };
        match self {
            Intervention::RemoveNodeExcise { node } | Intervention::RemoveNodeReplace { node } => {
                label(*node)
            }
            Intervention::AddEdgeUnit { i, j, .. } | Intervention::RemoveEdgeUnit { i, j, .. } => {
                format!("{}--{}", label(*i), label(*j))
            }
            Intervention::SetAttribute { node, name, value } => {
                format!("{}.{}={}", label(*node), name, value)
            }
        }
    }

    fn validate(&self, state: &NetworkState) -> Result<()> {
        let net = state.focal();
        match self {
            Intervention::RemoveNodeExcise { node } => {
                net.check_node(*node)?;
                if state.n() == 1 {
                    return Err(Error::Semantics(
                        "excising the last node would leave an empty network".into(),
                    ));
                }
            }
            Intervention::RemoveNodeReplace { node } => net.check_node(*node)?,
            Intervention::AddEdgeUnit { i, j, amount } | Intervention::RemoveEdgeUnit { i, j, amount } => {
                net.check_dyad(*i, *j)?;
                if !(*amount > 0.0 && amount.is_finite()) {
                    return Err(Error::Validation(format!(
                        "edge change amount must be positive, got {amount}"
                    )));
                }
            }
            Intervention::SetAttribute { node, name, value } => {
                net.check_node(*node)?;
                if !state.attributes().contains_key(name) {
                    return Err(Error::MissingAttribute(name.clone()));
                }
                if !value.is_finite() {
                    return Err(Error::Validation(format!("attribute value {value} is not finite")));
                }
            }
        }
        Ok(())
    }
}

/// Result of applying an intervention.
#[derive(Clone, Debug)]
pub struct Applied {
    pub state: NetworkState,
    /// Budget actually consumed: edge weight moved for edge kinds, 1 otherwise.
    pub consumed: f64,
}

/// Applies `iv` to a copy of `state`. The input is never mutated.
pub fn apply_intervention(state: &NetworkState, iv: &Intervention) -> Result<Applied> {
    iv.validate(state)?;
    let mut out = state.clone();
    let consumed = match iv {
        Intervention::RemoveNodeExcise { node } => {
            let v = *node;
            let label = out.focal().label(v).to_string();
            *out.focal_mut() = out.focal().without_node(v);
            for cov in out.covariates_mut().values_mut() {
                *cov = cov.without_node(v);
            }
            for values in out.attributes_mut().values_mut() {
                values.remove(v);
            }
            out.forget_replaced(&label);
            1.0
        }
        Intervention::RemoveNodeReplace { node } => {
            let v = *node;
            *out.focal_mut() = out.focal().with_node_zeroed(v);
            for cov in out.covariates_mut().values_mut() {
                *cov = cov.with_node_zeroed(v);
            }
            for values in out.attributes_mut().values_mut() {
                values[v] = 0.0;
            }
            out.mark_replaced(v);
            1.0
        }
        Intervention::AddEdgeUnit { i, j, amount } => {
            let w = out.focal().weight(*i, *j);
            out.focal_mut().set_weight(*i, *j, w + amount);
            *amount
        }
        Intervention::RemoveEdgeUnit { i, j, amount } => {
            let w = out.focal().weight(*i, *j);
            let taken = amount.min(w);
            out.focal_mut().set_weight(*i, *j, w - taken);
            taken
        }
        Intervention::SetAttribute { node, name, value } => {
            out.attributes_mut()
                .get_mut(name)
                .expect("validated above")[*node] = *value;
            1.0
        }
    };
    Ok(Applied {
        state: out,
        consumed,
    })
}
