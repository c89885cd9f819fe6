//! Monte Carlo evolution of a network under a fitted ERGM, and comparison of
//! the resulting metric trajectories across strategies.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ergm::{ErgmModel, Sampler};
use crate::metrics::{evaluate_with_focal, MetricSpec};
use crate::netcore::NetworkState;
use crate::rng::substream;

/// Values of `|baseline mean|` at or below this make a percentage undefined.
pub const DEGENERATE_BASELINE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// Recorded sweeps after step 0.
    pub steps: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Unrecorded sweeps run before step 0.
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default)]
    pub rescale_to_unit: bool,
}

impl EvolutionConfig {
    pub fn new(steps: usize, replicates: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            steps,
            replicates,
            seed,
            burn_in: 0,
            rescale_to_unit: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.replicates == 0 {
            return Err(Error::Validation(
                "evolution needs at least one step and one replicate".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub metric: String,
    pub replicates: usize,
    pub seed: u64,
    /// Index 0 is the state the evolution starts from.
    pub mean: Vec<f64>,
    /// Sample standard deviation across replicates (0 for one replicate).
    pub sd: Vec<f64>,
    /// `(min, max)` of the raw means when mapped onto [0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescaled: Option<(f64, f64)>,
}

impl EvolutionSummary {
    pub fn steps(&self) -> usize {
        self.mean.len().saturating_sub(1)
    }

    /// Aggregates per-replicate trajectories of equal length.
    pub fn from_trajectories(metric: impl Into<String>, seed: u64, runs: &[Vec<f64>]) -> Result<Self> {
        let first = runs
            .first()
            .ok_or_else(|| Error::Validation("no trajectories to summarize".into()))?;
        if runs.iter().any(|r| r.len() != first.len()) {
            return Err(Error::ShapeMismatch("trajectories differ in length".into()));
        }
        let r = runs.len() as f64;
        let mut mean = Vec::with_capacity(first.len());
        let mut sd = Vec::with_capacity(first.len());
        for t in 0..first.len() {
            // shifting by the first replicate keeps identical columns exact
            let pivot = first[t];
            let shift: f64 = runs.iter().map(|run| run[t] - pivot).sum::<f64>() / r;
            let m = pivot + shift;
            let ss: f64 = runs.iter().map(|run| (run[t] - pivot - shift).powi(2)).sum();
            mean.push(m);
            sd.push(if runs.len() > 1 { (ss / (r - 1.0)).sqrt() } else { 0.0 });
        }
        Ok(Self {
            metric: metric.into(),
            replicates: runs.len(),
            seed,
            mean,
            sd,
            rescaled: None,
        })
    }

    /// Maps means linearly so `lo` goes to 0 and `hi` to 1; SDs scale alike.
    pub fn rescaled_by(&self, lo: f64, hi: f64) -> Self {
        let span = if hi > lo { hi - lo } else { 1.0 };
        Self {
            mean: self.mean.iter().map(|m| ((m - lo) / span).clamp(0.0, 1.0)).collect(),
            sd: self.sd.iter().map(|s| s / span).collect(),
            rescaled: Some((lo, hi)),
            ..self.clone()
        }
    }

    fn bounds(&self) -> (f64, f64) {
        self.mean
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| (lo.min(m), hi.max(m)))
    }
}

/// Metric trajectory of one replicate: the value before any sweep, then after
/// each of `cfg.steps` sweeps. Replicate `r` draws from substream `r` of
/// `cfg.seed`.
pub fn simulate_replicate(
    state: &NetworkState,
    model: &ErgmModel,
    metric: &MetricSpec,
    cfg: &EvolutionConfig,
    replicate: usize,
) -> Result<Vec<f64>> {
    let sampler = Sampler::new(model, state.covariates(), state.focal())?;
    run_one(&sampler, state, metric, cfg, replicate)
}

fn run_one(
    sampler: &Sampler<'_>,
    state: &NetworkState,
    metric: &MetricSpec,
    cfg: &EvolutionConfig,
    replicate: usize,
) -> Result<Vec<f64>> {
    let mut rng = substream(cfg.seed, "evolution.replicate", replicate as u64);
    let mut net = state.focal().clone();
    for _ in 0..cfg.burn_in {
        sampler.sweep(&mut net, &mut rng);
    }
    let mut values = Vec::with_capacity(cfg.steps + 1);
    values.push(evaluate_with_focal(metric, state, &net)?);
    for _ in 0..cfg.steps {
        sampler.sweep(&mut net, &mut rng);
        values.push(evaluate_with_focal(metric, state, &net)?);
    }
    Ok(values)
}

/// Evolves the focal network of `state` under `model`, re-evaluating the
/// metric after every sweep. Covariate layers stay fixed; for a dyadic-model
/// metric the evolving focal network stands in for its own predictor layer.
pub fn run_evolution(
    state: &NetworkState,
    model: &ErgmModel,
    metric: &MetricSpec,
    cfg: &EvolutionConfig,
) -> Result<EvolutionSummary> {
    cfg.validate()?;
    metric.validate()?;
    let sampler = Sampler::new(model, state.covariates(), state.focal())?;
    let runs: Vec<Vec<f64>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| run_one(&sampler, state, metric, cfg, r))
        .collect::<Result<_>>()?;
    let summary = EvolutionSummary::from_trajectories(metric.name(), cfg.seed, &runs)?;
    Ok(if cfg.rescale_to_unit {
        let (lo, hi) = summary.bounds();
        summary.rescaled_by(lo, hi)
    } else {
        summary
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyBand {
    pub strategy: String,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDifference {
    pub first: String,
    pub second: String,
    /// `first.mean - second.mean` per step.
    pub difference: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metric: String,
    pub bands: Vec<StrategyBand>,
    pub differences: Vec<PairDifference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescaled: Option<(f64, f64)>,
}

/// Per-step ±2 SD bands for each named summary and all pairwise differences
/// of means. With `rescale`, every summary is mapped onto [0, 1] using the
/// global min and max of the means.
pub fn compare_strategies(summaries: &[(String, EvolutionSummary)], rescale: bool) -> Result<ComparisonReport> {
    let (_, first) = summaries
        .first()
        .ok_or_else(|| Error::Validation("nothing to compare".into()))?;
    for (name, s) in summaries {
        if s.mean.len() != first.mean.len() || s.replicates != first.replicates || s.metric != first.metric {
            return Err(Error::ShapeMismatch(format!(
                "summary `{name}` differs in steps, replicates or metric"
            )));
        }
    }
    let scaled: Vec<(String, EvolutionSummary)> = if rescale {
        let (lo, hi) = summaries.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, s)| {
            let (a, b) = s.bounds();
            (lo.min(a), hi.max(b))
        });
        summaries
            .iter()
            .map(|(name, s)| (name.clone(), s.rescaled_by(lo, hi)))
            .collect()
    } else {
        summaries.to_vec()
    };

    let bands = scaled
        .iter()
        .map(|(name, s)| StrategyBand {
            strategy: name.clone(),
            mean: s.mean.clone(),
            sd: s.sd.clone(),
            lower: s.mean.iter().zip(&s.sd).map(|(m, d)| m - 2.0 * d).collect(),
            upper: s.mean.iter().zip(&s.sd).map(|(m, d)| m + 2.0 * d).collect(),
        })
        .collect();
    let mut differences = Vec::new();
    for (a, (na, sa)) in scaled.iter().enumerate() {
        for (nb, sb) in &scaled[a + 1..] {
            differences.push(PairDifference {
                first: na.clone(),
                second: nb.clone(),
                difference: sa.mean.iter().zip(&sb.mean).map(|(x, y)| x - y).collect(),
            });
        }
    }
    Ok(ComparisonReport {
        metric: first.metric.clone(),
        bands,
        differences,
        rescaled: scaled.first().and_then(|(_, s)| s.rescaled),
    })
}

/// Writes `step,strategy,mean,sd,lower,upper` rows.
pub fn write_trajectories<W: Write>(report: &ComparisonReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "strategy", "mean", "sd", "lower", "upper"])
        .map_err(|e| Error::Parse(e.to_string()))?;
    for band in &report.bands {
        for t in 0..band.mean.len() {
            w.write_record([
                t.to_string(),
                band.strategy.clone(),
                band.mean[t].to_string(),
                band.sd[t].to_string(),
                band.lower[t].to_string(),
                band.upper[t].to_string(),
            ])
            .map_err(|e| Error::Parse(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Percentage improvement of `treated` over `baseline` at each step, with a
/// ±2 standard error band from an unequal-variance two-sample z statistic
/// divided by the baseline mean. Steps whose baseline mean is ~0 are
/// reported as [`Error::DegenerateBaseline`].
pub fn percentage_improvement(
    treated: &EvolutionSummary,
    baseline: &EvolutionSummary,
) -> Result<Vec<Result<Improvement>>> {
    if treated.mean.len() != baseline.mean.len() {
        return Err(Error::ShapeMismatch(
            "treated and baseline trajectories differ in length".into(),
        ));
    }
    let (rt, rb) = (treated.replicates as f64, baseline.replicates as f64);
    Ok((0..baseline.mean.len())
        .map(|t| {
            let b = baseline.mean[t];
            if b.abs() <= DEGENERATE_BASELINE {
                return Err(Error::DegenerateBaseline { step: t });
            }
            let estimate = 100.0 * (b - treated.mean[t]) / b;
            let se = (treated.sd[t].powi(2) / rt + baseline.sd[t].powi(2) / rb).sqrt();
            let half = 2.0 * 100.0 / b.abs() * se;
            Ok(Improvement {
                estimate,
                lower: estimate - half,
                upper: estimate + half,
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergm::StatisticSpec;
    use crate::netcore::WeightedNetwork;

    fn summary(mean: Vec<f64>, sd: Vec<f64>, replicates: usize) -> EvolutionSummary {
        EvolutionSummary {
            metric: "total-weight".into(),
            replicates,
            seed: 0,
            mean,
            sd,
            rescaled: None,
        }
    }

    #[test]
    fn step_zero_is_exact_and_runs_repeat() {
        let mut net = WeightedNetwork::unlabeled(6);
        net.set_weight(0, 1, 1.0);
        net.set_weight(2, 5, 1.0);
        let state = NetworkState::new(net);
        let model = ErgmModel::binary(vec![StatisticSpec::Edges], vec![-0.3]).unwrap();
        let cfg = EvolutionConfig::new(5, 4, 11).unwrap();
        let a = run_evolution(&state, &model, &MetricSpec::TotalEdgeWeight, &cfg).unwrap();
        let b = run_evolution(&state, &model, &MetricSpec::TotalEdgeWeight, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean[0], 2.0);
        assert_eq!(a.sd[0], 0.0);
        assert_eq!(a.mean.len(), 6);

        let runs: Vec<Vec<f64>> = (0..4)
            .map(|r| simulate_replicate(&state, &model, &MetricSpec::TotalEdgeWeight, &cfg, r).unwrap())
            .collect();
        for t in 0..6 {
            let m = runs.iter().map(|r| r[t]).sum::<f64>() / 4.0;
            assert!((m - a.mean[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn improvement_arithmetic() {
        let base = summary(vec![4.0, 2.0], vec![0.0, 0.0], 10);
        let half = summary(vec![2.0, 1.0], vec![0.0, 0.0], 10);
        let imp = percentage_improvement(&half, &base).unwrap();
        for step in imp {
            let s = step.unwrap();
            assert_eq!(s.estimate, 50.0);
            assert_eq!(s.lower, s.upper);
        }
        let same = percentage_improvement(&base, &base).unwrap();
        assert!(same.iter().all(|s| s.as_ref().unwrap().estimate == 0.0));

        let zero = summary(vec![0.0, 1.0], vec![0.0, 0.0], 10);
        let r = percentage_improvement(&half, &zero).unwrap();
        assert!(matches!(r[0], Err(Error::DegenerateBaseline { step: 0 })));
        assert!(r[1].is_ok());
        let short = summary(vec![1.0], vec![0.0], 10);
        assert!(matches!(percentage_improvement(&short, &base), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn comparison_bands_and_rescaling() {
        let a = summary(vec![10.0, 8.0, 6.0], vec![1.0, 1.0, 0.5], 5);
        let b = summary(vec![10.0, 9.0, 9.0], vec![0.0, 1.0, 1.0], 5);
        let rep = compare_strategies(&[("greedy".into(), a.clone()), ("none".into(), b.clone())], false).unwrap();
        assert_eq!(rep.differences[0].difference, vec![0.0, -1.0, -3.0]);
        assert_eq!(rep.bands[0].lower, vec![8.0, 6.0, 5.0]);

        let self_cmp = compare_strategies(&[("x".into(), a.clone()), ("y".into(), a.clone())], false).unwrap();
        assert!(self_cmp.differences[0].difference.iter().all(|d| *d == 0.0));

        let scaled = compare_strategies(&[("greedy".into(), a), ("none".into(), b)], true).unwrap();
        assert_eq!(scaled.rescaled, Some((6.0, 10.0)));
        assert_eq!(scaled.bands[0].mean, vec![1.0, 0.5, 0.0]);
        assert_eq!(scaled.bands[0].sd[2], 0.125);

        let other = summary(vec![1.0, 2.0], vec![0.0, 0.0], 5);
        let c = summary(vec![1.0, 2.0, 3.0], vec![0.0; 3], 5);
        assert!(matches!(
            compare_strategies(&[("a".into(), other), ("b".into(), c)], false),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn trajectory_csv_columns() {
        let a = summary(vec![1.0, 2.0], vec![0.0, 0.5], 3);
        let rep = compare_strategies(&[("greedy".into(), a)], false).unwrap();
        let mut buf = Vec::new();
        write_trajectories(&rep, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "step,strategy,mean,sd,lower,upper");
        assert_eq!(text.lines().nth(2).unwrap(), "1,greedy,2,0.5,1,3");
    }
}
