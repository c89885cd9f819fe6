use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::network::WeightedNetwork;
use crate::error::{Error, Result};

/// Default name under which the focal network is addressable.
pub const DEFAULT_FOCAL_NAME: &str = "focal";

/// The unit an intervention acts on: a focal network plus aligned dyadic
/// covariates and per-node attributes.
///
/// The focal network is also reachable by name (`focal_name`), so a model
/// that uses it as a predictor sees it change as interventions and
/// simulations rewrite it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    focal_name: String,
    focal: WeightedNetwork,
    covariates: BTreeMap<String, WeightedNetwork>,
    attributes: BTreeMap<String, Vec<f64>>,
    /// Labels of nodes already removed with replacement.
    replaced: BTreeSet<String>,
}

impl NetworkState {
    pub fn new(focal: WeightedNetwork) -> Self {
        Self {
            focal_name: DEFAULT_FOCAL_NAME.to_string(),
            focal,
            covariates: BTreeMap::new(),
            attributes: BTreeMap::new(),
            replaced: BTreeSet::new(),
        }
    }

    pub fn with_focal_name(mut self, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if self.covariates.contains_key(&name) {
            return Err(Error::Validation(format!(
                "focal name `{name}` collides with a covariate"
            )));
        }
        self.focal_name = name;
        Ok(self)
    }

    pub fn with_covariate(mut self, name: impl Into<String>, net: WeightedNetwork) -> Result<Self> {
        let name = name.into();
        if name == self.focal_name {
            return Err(Error::Validation(format!(
                "covariate name `{name}` collides with the focal network"
            )));
        }
        if !net.same_layout(&self.focal) {
            return Err(Error::DimensionMismatch(format!(
                "covariate `{name}` does not share the focal network's nodes"
            )));
        }
        self.covariates.insert(name, net);
        Ok(self)
    }

    pub fn with_attribute(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "attribute `{name}` has {} values for {} nodes",
                values.len(),
                self.n()
            )));
        }
        self.attributes.insert(name, values);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.focal.n()
    }

    pub fn focal_name(&self) -> &str {
        &self.focal_name
    }

    pub fn focal(&self) -> &WeightedNetwork {
        &self.focal
    }

    pub fn covariates(&self) -> &BTreeMap<String, WeightedNetwork> {
        &self.covariates
    }

    pub fn attributes(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.attributes
    }

    pub fn replaced(&self) -> &BTreeSet<String> {
        &self.replaced
    }

    pub fn is_replaced(&self, v: usize) -> bool {
        self.replaced.contains(self.focal.label(v))
    }

    /// Resolves a layer by name: the focal network or a covariate.
    pub fn layer(&self, name: &str) -> Result<&WeightedNetwork> {
        if name == self.focal_name {
            Ok(&self.focal)
        } else {
            self.covariates
                .get(name)
                .ok_or_else(|| Error::MissingCovariate(name.to_string()))
        }
    }

    /// Copy with the focal network swapped; covariates stay fixed.
    pub fn with_focal(&self, focal: WeightedNetwork) -> Result<Self> {
        if !focal.same_layout(&self.focal) {
            return Err(Error::DimensionMismatch(
                "replacement focal network has a different node set".into(),
            ));
        }
        let mut out = self.clone();
        out.focal = focal;
        Ok(out)
    }

    pub(crate) fn focal_mut(&mut self) -> &mut WeightedNetwork {
        &mut self.focal
    }

    pub(crate) fn covariates_mut(&mut self) -> &mut BTreeMap<String, WeightedNetwork> {
        &mut self.covariates
    }

    pub(crate) fn attributes_mut(&mut self) -> &mut BTreeMap<String, Vec<f64>> {
        &mut self.attributes
    }

    pub(crate) fn mark_replaced(&mut self, v: usize) {
        let label = self.focal.label(v).to_string();
        self.replaced.insert(label);
    }

    pub(crate) fn forget_replaced(&mut self, label: &str) {
        self.replaced.remove(label);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariates_must_align() {
        let state = NetworkState::new(WeightedNetwork::unlabeled(3));
        let err = state
            .clone()
            .with_covariate("x", WeightedNetwork::unlabeled(4))
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
        let err = state.with_attribute("age", vec![1.0]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn layer_resolves_focal_by_name() {
        let mut focal = WeightedNetwork::unlabeled(2);
        focal.set_weight(0, 1, 3.0);
        let state = NetworkState::new(focal)
            .with_focal_name("communication")
            .unwrap()
            .with_covariate("org", WeightedNetwork::unlabeled(2))
            .unwrap();
        assert_eq!(state.layer("communication").unwrap().weight(0, 1), 3.0);
        assert_eq!(state.layer("org").unwrap().weight(0, 1), 0.0);
        assert!(matches!(state.layer("kin"), Err(Error::MissingCovariate(_))));
    }
}
