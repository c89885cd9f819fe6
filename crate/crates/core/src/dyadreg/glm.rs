//! Quasi-Poisson regression with a log link, fitted by IRLS.
//!
//! The quasi-Poisson coefficient estimates coincide with the Poisson MLE;
//! only the dispersion (and so the standard errors) differ.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::design::DyadDesign;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;
pub const TOLERANCE: f64 = 1e-8;
/// Coefficients beyond this magnitude mean the fitted means run off to 0 or
/// infinity.
pub const SEPARATION_BOUND: f64 = 30.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicModel {
    /// Intercept first, then one coefficient per predictor.
    pub beta: Vec<f64>,
    pub dispersion: f64,
    pub predictor_names: Vec<String>,
    pub converged: bool,
    pub iterations: usize,
    /// Quasi-Poisson standard errors, same order as `beta`. Empty for models
    /// supplied from elsewhere.
    #[serde(default)]
    pub std_errors: Vec<f64>,
}

impl DyadicModel {
    /// A model with externally supplied coefficients.
    pub fn from_coefficients(beta: Vec<f64>, dispersion: f64, predictor_names: Vec<String>) -> Result<Self> {
        let model = Self {
            beta,
            dispersion,
            predictor_names,
            converged: true,
            iterations: 0,
            std_errors: Vec::new(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.len() != self.predictor_names.len() + 1 {
            return Err(Error::ArityMismatch {
                expected: self.predictor_names.len() + 1,
                got: self.beta.len(),
            });
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Validation("model coefficients must be finite".into()));
        }
        if !(self.dispersion > 0.0 && self.dispersion.is_finite()) {
            return Err(Error::Validation(format!(
                "dispersion must be positive, got {}",
                self.dispersion
            )));
        }
        Ok(())
    }

    pub fn intercept(&self) -> f64 {
        self.beta[0]
    }

    /// `beta / se` for every coefficient.
    pub fn t_stats(&self) -> Vec<f64> {
        self.beta
            .iter()
            .zip(&self.std_errors)
            .map(|(b, s)| b / s)
            .collect()
    }
}

/// Expected response `exp(b0 + b . x)` for one dyad.
pub fn predict_dyad(model: &DyadicModel, x: &[f64]) -> Result<f64> {
    if x.len() + 1 != model.beta.len() {
        return Err(Error::ArityMismatch {
            expected: model.beta.len() - 1,
            got: x.len(),
        });
    }
    let eta = model.beta[0] + model.beta[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>();
    Ok(eta.exp())
}

fn numerical_rank(x: &DMatrix<f64>) -> usize {
    let gram = x.transpose() * x;
    let eig = SymmetricEigen::new(gram);
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return 0;
    }
    eig.eigenvalues.iter().filter(|&&l| l > max * 1e-11).count()
}

fn deviance(y: &[f64], mu: &[f64]) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&y, &m)| {
            let t = if y > 0.0 { y * (y / m).ln() } else { 0.0 };
            2.0 * (t - (y - m))
        })
        .sum()
}

fn means(x: &DMatrix<f64>, beta: &DVector<f64>) -> Vec<f64> {
    (x * beta).iter().map(|e| e.exp()).collect()
}

/// Weighted normal equations `X' W X` and `X' W z` for the current fit.
fn normal_equations(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>, mu: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let p = x.ncols();
    let mut xtwx = DMatrix::zeros(p, p);
    let mut xtwz = DVector::zeros(p);
    for r in 0..x.nrows() {
        let row = x.row(r);
        let eta = row.dot(&beta.transpose());
        let w = mu[r];
        let z = eta + (y[r] - mu[r]) / mu[r];
        for a in 0..p {
            let wa = w * row[a];
            xtwz[a] += wa * z;
            for b in a..p {
                xtwx[(a, b)] += wa * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtwx[(a, b)] = xtwx[(b, a)];
        }
    }
    (xtwx, xtwz)
}

pub fn fit_quasipoisson(design: &DyadDesign) -> Result<DyadicModel> {
    let y = &design.y;
    let x = &design.x;
    let (d, p) = x.shape();
    if y.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::Validation("responses must be finite and nonnegative".into()));
    }
    if d <= p {
        return Err(Error::Validation(format!("{d} dyads cannot identify {p} coefficients")));
    }
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::Separation("response is identically zero".into()));
    }
    let rank = numerical_rank(x);
    if rank < p {
        return Err(Error::RankDeficiency { rank, columns: p });
    }

    let mean_y = y.iter().sum::<f64>() / d as f64;
    let mut beta = DVector::zeros(p);
    beta[0] = (mean_y + 1e-9).ln();
    let mut mu = means(x, &beta);
    let mut dev = deviance(y, &mu);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (xtwx, xtwz) = normal_equations(x, y, &beta, &mu);
        let chol = xtwx
            .cholesky()
            .ok_or(Error::RankDeficiency { rank: p - 1, columns: p })?;
        let target = chol.solve(&xtwz);
        let mut step = &target - &beta;
        let mut candidate = &beta + &step;
        let mut cand_mu = means(x, &candidate);
        let mut cand_dev = deviance(y, &cand_mu);
        let mut halvings = 0;
        while !(cand_dev.is_finite() && cand_dev <= dev * (1.0 + 1e-12) + 1e-12) && halvings < 30 {
            step *= 0.5;
            candidate = &beta + &step;
            cand_mu = means(x, &candidate);
            cand_dev = deviance(y, &cand_mu);
            halvings += 1;
        }
        if candidate.iter().any(|b| !b.is_finite() || b.abs() > SEPARATION_BOUND) {
            return Err(Error::Separation(format!(
                "coefficient magnitude exceeded {SEPARATION_BOUND} at iteration {iterations}"
            )));
        }
        let change = step.amax();
        beta = candidate;
        mu = cand_mu;
        dev = cand_dev;
        if change < TOLERANCE {
            converged = true;
            break;
        }
    }

    let dispersion = y
        .iter()
        .zip(&mu)
        .map(|(&y, &m)| (y - m) * (y - m) / m)
        .sum::<f64>()
        / (d - p) as f64;
    let (xtwx, _) = normal_equations(x, y, &beta, &mu);
    let cov = xtwx
        .cholesky()
        .ok_or(Error::RankDeficiency { rank: p - 1, columns: p })?
        .inverse();
    let std_errors = (0..p).map(|k| (dispersion * cov[(k, k)]).sqrt()).collect();

    Ok(DyadicModel {
        beta: beta.iter().copied().collect(),
        dispersion,
        predictor_names: design.predictor_names.clone(),
        converged,
        iterations,
        std_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadreg::build_design;
    use crate::netcore::WeightedNetwork;

    #[test]
    fn intercept_only_is_log_mean() {
        let mut y = WeightedNetwork::unlabeled(5);
        let vals = [0.0, 1.0, 3.0, 0.0, 2.0, 5.0, 1.0, 0.0, 0.0, 4.0];
        let dyads: Vec<_> = y.dyads().collect();
        for (&(i, j), &v) in dyads.iter().zip(&vals) {
            y.set_weight(i, j, v);
        }
        let model = fit_quasipoisson(&build_design(&y, &[]).unwrap()).unwrap();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!((model.beta[0] - mean.ln()).abs() < 1e-10);
        assert!(model.converged);
    }

    #[test]
    fn zero_response_is_separation() {
        let y = WeightedNetwork::unlabeled(5);
        assert!(matches!(
            fit_quasipoisson(&build_design(&y, &[]).unwrap()),
            Err(Error::Separation(_))
        ));
    }

    #[test]
    fn duplicate_predictor_is_rank_deficient() {
        let mut y = WeightedNetwork::unlabeled(5);
        let mut x = WeightedNetwork::unlabeled(5);
        for (k, (i, j)) in y.clone().dyads().enumerate() {
            y.set_weight(i, j, (k % 3) as f64);
            x.set_weight(i, j, (k % 2) as f64);
        }
        let design = build_design(&y, &[("a".into(), &x), ("b".into(), &x)]).unwrap();
        assert!(matches!(fit_quasipoisson(&design), Err(Error::RankDeficiency { .. })));
    }

    #[test]
    fn predict_examples() {
        let m = DyadicModel::from_coefficients(vec![-6.6235, 1.0], 1.0, vec!["c".into()]).unwrap();
        assert!((predict_dyad(&m, &[0.0]).unwrap() - 1.33e-3).abs() < 0.01e-3);
        let zero = DyadicModel::from_coefficients(vec![0.0, 0.0], 1.0, vec!["c".into()]).unwrap();
        assert_eq!(predict_dyad(&zero, &[17.0]).unwrap(), 1.0);
        let unit = DyadicModel::from_coefficients(vec![0.0, 1.0], 1.0, vec!["c".into()]).unwrap();
        assert!((predict_dyad(&unit, &[3f64.ln()]).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(predict_dyad(&unit, &[1.0, 2.0]), Err(Error::ArityMismatch { .. })));
    }
}
