//! Metropolis-Hastings sweeps used as the network recovery mechanism.
//!
//! One sweep visits every dyad once in a freshly shuffled order and is the
//! unit of simulated time.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::model::{ErgmMode, ErgmModel};
use super::stats::{check_binary, resolve, Term};
use crate::error::{Error, Result};
use crate::netcore::WeightedNetwork;

pub struct Sampler<'a> {
    model: &'a ErgmModel,
    terms: Vec<Term<'a>>,
    dyads: Vec<(usize, usize)>,
}

impl<'a> Sampler<'a> {
    /// Prepares a sampler for networks laid out like `net`.
    pub fn new(
        model: &'a ErgmModel,
        covariates: &'a BTreeMap<String, WeightedNetwork>,
        net: &WeightedNetwork,
    ) -> Result<Self> {
        model.validate()?;
        Self::check_mode(model, net)?;
        let terms = resolve(&model.statistics, covariates, net)?;
        Ok(Self {
            model,
            terms,
            dyads: net.dyads().collect(),
        })
    }

    fn check_mode(model: &ErgmModel, net: &WeightedNetwork) -> Result<()> {
        if model.mode == ErgmMode::Binary && !net.is_binary() {
            return Err(Error::ModeMismatch("binary model on a valued network".into()));
        }
        check_binary(&model.statistics, net)
    }

    /// `theta . delta s` for moving dyad `(i, j)` to `value`.
    pub fn log_ratio(&self, net: &WeightedNetwork, i: usize, j: usize, value: f64) -> f64 {
        self.terms
            .iter()
            .zip(&self.model.theta)
            .map(|(t, th)| th * t.delta(net, i, j, value))
            .sum()
    }

    fn propose<R: Rng + ?Sized>(&self, current: f64, rng: &mut R) -> f64 {
        match self.model.mode {
            ErgmMode::Binary => 1.0 - current,
            ErgmMode::Valued => {
                let m = self.model.max_weight;
                let in_support = current.fract() == 0.0 && current <= f64::from(m);
                if in_support {
                    // uniform over {0..m} minus the current value
                    let u = rng.random_range(0..m);
                    let c = current as u32;
                    f64::from(if u < c { u } else { u + 1 })
                } else {
                    // off-support weights (e.g. left by an intervention) are transient
                    f64::from(rng.random_range(0..=m))
                }
            }
        }
    }

    fn log_h(&self, value: f64) -> f64 {
        if value.fract() == 0.0 && value <= f64::from(self.model.max_weight) {
            self.model.reference.log_weight(value as u32)
        } else {
            0.0
        }
    }

    /// One MH sweep over all dyads, in place.
    pub fn sweep<R: Rng + ?Sized>(&self, net: &mut WeightedNetwork, rng: &mut R) {
        let mut order = self.dyads.clone();
        order.shuffle(rng);
        for (i, j) in order {
            let current = net.weight(i, j);
            let proposal = self.propose(current, rng);
            let log_accept =
                self.log_ratio(net, i, j, proposal) + self.log_h(proposal) - self.log_h(current);
            if log_accept >= 0.0 || rng.random::<f64>() < log_accept.exp() {
                net.set_weight(i, j, proposal);
            }
        }
    }
}

/// Returns the network after one full sweep.
pub fn simulate_step<R: Rng + ?Sized>(
    net: &WeightedNetwork,
    covariates: &BTreeMap<String, WeightedNetwork>,
    model: &ErgmModel,
    rng: &mut R,
) -> Result<WeightedNetwork> {
    let sampler = Sampler::new(model, covariates, net)?;
    let mut out = net.clone();
    sampler.sweep(&mut out, rng);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergm::StatisticSpec;
    use crate::rng::substream;

    #[test]
    fn sweep_preserves_invariants() {
        let model = ErgmModel::valued(
            vec![StatisticSpec::NonZero, StatisticSpec::WeightSum, StatisticSpec::TransitiveWeights],
            vec![0.5, -0.2, 0.1],
            4,
        )
        .unwrap();
        let mut rng = substream(1, "test", 0);
        let mut net = WeightedNetwork::unlabeled(7);
        for _ in 0..20 {
            net = simulate_step(&net, &BTreeMap::new(), &model, &mut rng).unwrap();
            for i in 0..7 {
                assert_eq!(net.weight(i, i), 0.0);
                for j in 0..7 {
                    let w = net.weight(i, j);
                    assert_eq!(w, net.weight(j, i));
                    assert!((0.0..=4.0).contains(&w) && w.fract() == 0.0);
                }
            }
        }
    }

    #[test]
    fn deterministic_given_rng() {
        let model = ErgmModel::binary(vec![StatisticSpec::Edges], vec![-0.5]).unwrap();
        let net = WeightedNetwork::unlabeled(9);
        let a = simulate_step(&net, &BTreeMap::new(), &model, &mut substream(4, "s", 0)).unwrap();
        let b = simulate_step(&net, &BTreeMap::new(), &model, &mut substream(4, "s", 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn binary_model_rejects_valued_network() {
        let model = ErgmModel::binary(vec![StatisticSpec::Edges], vec![0.0]).unwrap();
        let mut net = WeightedNetwork::unlabeled(3);
        net.set_weight(0, 1, 2.0);
        let err = simulate_step(&net, &BTreeMap::new(), &model, &mut substream(0, "s", 0)).unwrap_err();
        assert!(matches!(err, Error::ModeMismatch(_)));
    }

    #[test]
    fn zero_change_is_always_accepted() {
        // theta = 0 makes every log ratio zero; a binary sweep then toggles every dyad
        let model = ErgmModel::binary(vec![StatisticSpec::Edges], vec![0.0]).unwrap();
        let net = WeightedNetwork::unlabeled(6);
        let out = simulate_step(&net, &BTreeMap::new(), &model, &mut substream(2, "s", 0)).unwrap();
        assert_eq!(out.total_weight(), 15.0);
    }
}
