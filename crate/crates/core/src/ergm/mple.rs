//! Maximum pseudolikelihood fitting.
//!
//! Each dyad contributes the log conditional probability of its observed
//! value given the rest of the network. Binary models are the `max_weight
//! = 1` case, where this is a logistic regression on change statistics.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::model::{ErgmMode, ErgmModel};
use super::stats::{check_binary, resolve, StatisticSpec};
use crate::error::{Error, Result};
use crate::netcore::WeightedNetwork;

pub const MAX_ITERATIONS: usize = 500;
pub const TOLERANCE: f64 = 1e-6;
const THETA_BOUND: f64 = 100.0;

struct Pseudo {
    p: usize,
    levels: usize,
    /// `features[(d * levels + v) * p + k]`: change in statistic `k` when
    /// dyad `d` moves from 0 to `v`.
    features: Vec<f64>,
    log_h: Vec<f64>,
    observed: Vec<usize>,
}

impl Pseudo {
    fn dyads(&self) -> usize {
        self.observed.len()
    }

    fn feature(&self, d: usize, v: usize) -> &[f64] {
        let start = (d * self.levels + v) * self.p;
        &self.features[start..start + self.p]
    }

    /// Log pseudolikelihood, gradient and negated Hessian.
    fn evaluate(&self, theta: &DVector<f64>, derivatives: bool) -> (f64, DVector<f64>, DMatrix<f64>) {
        let p = self.p;
        let mut ll = 0.0;
        let mut grad = DVector::zeros(p);
        let mut info = DMatrix::zeros(p, p);
        let mut eta = vec![0.0; self.levels];
        let mut mean = vec![0.0; p];
        for d in 0..self.dyads() {
            for (v, e) in eta.iter_mut().enumerate() {
                let f = self.feature(d, v);
                *e = self.log_h[v] + f.iter().zip(theta.iter()).map(|(a, b)| a * b).sum::<f64>();
            }
            let top = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = eta.iter().map(|e| (e - top).exp()).sum();
            let log_z = top + z.ln();
            let o = self.observed[d];
            ll += eta[o] - log_z;
            if !derivatives {
                continue;
            }
            mean.iter_mut().for_each(|m| *m = 0.0);
            for v in 0..self.levels {
                let prob = (eta[v] - log_z).exp();
                let f = self.feature(d, v);
                for k in 0..p {
                    mean[k] += prob * f[k];
                }
            }
            let fo = self.feature(d, o);
            for k in 0..p {
                grad[k] += fo[k] - mean[k];
            }
            for v in 0..self.levels {
                let prob = (eta[v] - log_z).exp();
                if prob == 0.0 {
                    continue;
                }
                let f = self.feature(d, v);
                for a in 0..p {
                    let da = f[a] - mean[a];
                    for b in a..p {
                        info[(a, b)] += prob * da * (f[b] - mean[b]);
                    }
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                info[(a, b)] = info[(b, a)];
            }
        }
        (ll, grad, info)
    }
}

fn observed_level(w: f64, max_weight: u32, i: usize, j: usize) -> Result<usize> {
    if w.fract() != 0.0 || w > f64::from(max_weight) {
        return Err(Error::Validation(format!(
            "weight {w} at ({i}, {j}) is not an integer in [0, {max_weight}]"
        )));
    }
    Ok(w as usize)
}

/// Fits `theta` by maximum pseudolikelihood.
///
/// For valued models `max_weight` defaults to the largest observed weight.
pub fn fit_mple(
    net: &WeightedNetwork,
    covariates: &BTreeMap<String, WeightedNetwork>,
    statistics: &[StatisticSpec],
    mode: ErgmMode,
    max_weight: Option<u32>,
) -> Result<ErgmModel> {
    let mut model = match mode {
        ErgmMode::Binary => {
            if !net.is_binary() {
                return Err(Error::ModeMismatch("binary fit needs a 0/1 network".into()));
            }
            ErgmModel::binary(statistics.to_vec(), vec![0.0; statistics.len()])?
        }
        ErgmMode::Valued => {
            let m = max_weight.unwrap_or_else(|| net.max_weight().ceil().max(1.0) as u32);
            ErgmModel::valued(statistics.to_vec(), vec![0.0; statistics.len()], m)?
        }
    };
    check_binary(statistics, net)?;
    let terms = resolve(statistics, covariates, net)?;
    let levels = model.max_weight as usize + 1;
    let p = statistics.len();
    if p == 0 {
        return Err(Error::Validation("no statistics to fit".into()));
    }

    let dyads: Vec<(usize, usize)> = net.dyads().collect();
    let mut features = Vec::with_capacity(dyads.len() * levels * p);
    let mut observed = Vec::with_capacity(dyads.len());
    let mut base = vec![0.0; p];
    for &(i, j) in &dyads {
        observed.push(observed_level(net.weight(i, j), model.max_weight, i, j)?);
        for (k, t) in terms.iter().enumerate() {
            base[k] = t.delta(net, i, j, 0.0);
        }
        for v in 0..levels {
            for (k, t) in terms.iter().enumerate() {
                features.push(t.delta(net, i, j, v as f64) - base[k]);
            }
        }
    }
    let reference = model.reference;
    let log_h = (0..levels as u32).map(|v| reference.log_weight(v)).collect();
    let pseudo = Pseudo {
        p,
        levels,
        features,
        log_h,
        observed,
    };

    let mut theta = DVector::zeros(p);
    let (mut ll, mut grad, mut info) = pseudo.evaluate(&theta, true);
    for _ in 0..MAX_ITERATIONS {
        let chol = info
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Separation("pseudolikelihood information matrix is singular".into()))?;
        let mut step = chol.solve(&grad);
        let mut candidate = &theta + &step;
        let mut cand_ll = pseudo.evaluate(&candidate, false).0;
        let mut halvings = 0;
        while !(cand_ll.is_finite() && cand_ll >= ll - 1e-12 * ll.abs()) && halvings < 40 {
            step *= 0.5;
            candidate = &theta + &step;
            cand_ll = pseudo.evaluate(&candidate, false).0;
            halvings += 1;
        }
        let change = step.amax();
        theta = candidate;
        (ll, grad, info) = pseudo.evaluate(&theta, true);
        if theta.amax() > THETA_BOUND || ll > -1e-10 * pseudo.dyads() as f64 {
            return Err(Error::Separation(
                "pseudolikelihood has no finite maximizer".into(),
            ));
        }
        if change < TOLERANCE {
            model.theta = theta.iter().copied().collect();
            return Ok(model);
        }
    }
    Err(Error::NonConvergence(MAX_ITERATIONS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_only_is_logit_density() {
        let mut net = WeightedNetwork::unlabeled(8);
        let dyads: Vec<_> = net.dyads().collect();
        for (k, &(i, j)) in dyads.iter().enumerate() {
            if k % 3 == 0 {
                net.set_weight(i, j, 1.0);
            }
        }
        let density = net.total_weight() / net.dyad_count() as f64;
        let model = fit_mple(&net, &BTreeMap::new(), &[StatisticSpec::Edges], ErgmMode::Binary, None).unwrap();
        assert!((model.theta[0] - (density / (1.0 - density)).ln()).abs() < 1e-6);
    }

    #[test]
    fn empty_network_is_separated() {
        let net = WeightedNetwork::unlabeled(6);
        assert!(matches!(
            fit_mple(&net, &BTreeMap::new(), &[StatisticSpec::Edges], ErgmMode::Binary, None),
            Err(Error::Separation(_))
        ));
    }

    #[test]
    fn valued_rejects_fractional_weights() {
        let mut net = WeightedNetwork::unlabeled(4);
        net.set_weight(0, 1, 1.5);
        assert!(fit_mple(&net, &BTreeMap::new(), &[StatisticSpec::WeightSum], ErgmMode::Valued, Some(3)).is_err());
        assert!(matches!(
            fit_mple(&net, &BTreeMap::new(), &[StatisticSpec::Edges], ErgmMode::Binary, None),
            Err(Error::ModeMismatch(_))
        ));
    }
}
