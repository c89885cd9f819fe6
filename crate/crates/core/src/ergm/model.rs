use std::path::Path;

use serde::{Deserialize, Serialize};

use super::stats::StatisticSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErgmMode {
    Binary,
    Valued,
}

/// Baseline measure `h` over a dyad's possible values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMeasure {
    /// `h = 1` on `{0, 1}`.
    Bernoulli,
    /// `h = 1` on `{0, ..., max_weight}`.
    DiscreteUniform,
}

impl ReferenceMeasure {
    /// `log h(v)` for a value in the support.
    pub fn log_weight(self, _value: u32) -> f64 {
        match self {
            ReferenceMeasure::Bernoulli | ReferenceMeasure::DiscreteUniform => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgmModel {
    pub statistics: Vec<StatisticSpec>,
    pub theta: Vec<f64>,
    pub mode: ErgmMode,
    /// Largest dyad value in the valued support; 1 for binary models.
    pub max_weight: u32,
    pub reference: ReferenceMeasure,
}

impl ErgmModel {
    pub fn binary(statistics: Vec<StatisticSpec>, theta: Vec<f64>) -> Result<Self> {
        let model = Self {
            statistics,
            theta,
            mode: ErgmMode::Binary,
            max_weight: 1,
            reference: ReferenceMeasure::Bernoulli,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn valued(statistics: Vec<StatisticSpec>, theta: Vec<f64>, max_weight: u32) -> Result<Self> {
        let model = Self {
            statistics,
            theta,
            mode: ErgmMode::Valued,
            max_weight,
            reference: ReferenceMeasure::DiscreteUniform,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.len() != self.statistics.len() {
            return Err(Error::ArityMismatch {
                expected: self.statistics.len(),
                got: self.theta.len(),
            });
        }
        if self.theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Validation("theta must be finite".into()));
        }
        match self.mode {
            ErgmMode::Binary => {
                if self.max_weight != 1 || self.reference != ReferenceMeasure::Bernoulli {
                    return Err(Error::Validation(
                        "binary models use max_weight 1 and the Bernoulli reference".into(),
                    ));
                }
                if let Some(s) = self.statistics.iter().find(|s| !s.allowed_in_binary()) {
                    return Err(Error::ModeMismatch(format!("`{s}` is a valued statistic")));
                }
            }
            ErgmMode::Valued => {
                if self.max_weight < 1 {
                    return Err(Error::Validation("valued models need max_weight >= 1".into()));
                }
                if self.reference == ReferenceMeasure::Bernoulli && self.max_weight != 1 {
                    return Err(Error::Validation(
                        "the Bernoulli reference only covers max_weight 1".into(),
                    ));
                }
                if let Some(s) = self.statistics.iter().find(|s| !s.allowed_in_valued()) {
                    return Err(Error::ModeMismatch(format!("`{s}` needs a binary model")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ErgmModel =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("ERGM model: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}
