use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance above which an off-symmetric pair is rejected.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Diagonal entries with magnitude at or below this are zeroed with a warning.
pub const DIAGONAL_TOL: f64 = 1e-12;

/// Undirected network with nonnegative real dyad weights.
///
/// Weights are stored densely, row-major, and kept symmetric with a zero
/// diagonal. Labels are unique and follow every transformation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork", into = "RawNetwork")]
pub struct WeightedNetwork {
    labels: Vec<String>,
    w: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    labels: Vec<String>,
    weights: Vec<Vec<f64>>,
}

impl TryFrom<RawNetwork> for WeightedNetwork {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        WeightedNetwork::new(raw.labels, raw.weights)
    }
}

impl From<WeightedNetwork> for RawNetwork {
    fn from(net: WeightedNetwork) -> Self {
        let weights = (0..net.n()).map(|i| net.row(i).to_vec()).collect();
        RawNetwork {
            labels: net.labels,
            weights,
        }
    }
}

fn check_labels(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidNetwork(format!("duplicate label `{l}`")));
        }
    }
    Ok(())
}

impl WeightedNetwork {
    /// Builds a network from a square matrix, validating every invariant.
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels but {} rows",
                n,
                rows.len()
            )));
        }
        let mut w = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} cells, expected {n}",
                    row.len()
                )));
            }
            w.extend_from_slice(row);
        }
        Self::from_flat(labels, w)
    }

    /// Builds a network from a row-major `n * n` buffer.
    pub fn from_flat(labels: Vec<String>, mut w: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if w.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "buffer of {} cells for {n} nodes",
                w.len()
            )));
        }
        check_labels(&labels)?;
        for i in 0..n {
            let d = w[i * n + i];
            if !d.is_finite() || d.abs() > DIAGONAL_TOL {
                return Err(Error::Diagonal { i, value: d });
            }
            if d != 0.0 {
                log::warn!("zeroing diagonal entry {d:e} at node {i}");
                w[i * n + i] = 0.0;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let v = w[i * n + j];
                if !v.is_finite() {
                    return Err(Error::Parse(format!("non-finite weight at ({i}, {j})")));
                }
                if v < 0.0 {
                    return Err(Error::NegativeWeight { i, j, value: v });
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (w[i * n + j], w[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOL {
                    return Err(Error::Asymmetry { i, j, a, b });
                }
                if a != b {
                    let m = 0.5 * (a + b);
                    w[i * n + j] = m;
                    w[j * n + i] = m;
                }
            }
        }
        Ok(Self { labels, w })
    }

    /// An edgeless network over the given labels.
    pub fn empty(labels: Vec<String>) -> Result<Self> {
        check_labels(&labels)?;
        let n = labels.len();
        Ok(Self {
            labels,
            w: vec![0.0; n * n],
        })
    }

    /// An edgeless network labelled `0..n`.
    pub fn unlabeled(n: usize) -> Self {
        Self {
            labels: (0..n).map(|i| i.to_string()).collect(),
            w: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of unordered node pairs.
    pub fn dyad_count(&self) -> usize {
        let n = self.n();
        n * n.saturating_sub(1) / 2
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n() + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.w[i * n..(i + 1) * n]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    ///
    /// Panics on a diagonal target or a negative / non-finite weight.
    #[inline]
    pub fn set_weight(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j, "self-loops are not representable");
        assert!(
            value >= 0.0 && value.is_finite(),
            "weights must be finite and nonnegative, got {value}"
        );
        let n = self.n();
        self.w[i * n + j] = value;
        self.w[j * n + i] = value;
    }

    /// Upper-triangle pairs `(i, j)`, `i < j`, in lexicographic order.
    pub fn dyads(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
    }

    /// Sum of upper-triangle weights.
    pub fn total_weight(&self) -> f64 {
        self.dyads().map(|(i, j)| self.weight(i, j)).sum()
    }

    pub fn weighted_degree(&self, v: usize) -> Result<f64> {
        self.check_node(v)?;
        Ok(self.row(v).iter().sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.w.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_weight(&self) -> f64 {
        self.w.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_binary(&self) -> bool {
        self.w.iter().all(|&x| x == 0.0 || x == 1.0)
    }

    pub fn same_layout(&self, other: &WeightedNetwork) -> bool {
        self.labels == other.labels
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::Index(format!("node {v} not in [0, {})", self.n())))
        }
    }

    pub fn check_dyad(&self, i: usize, j: usize) -> Result<()> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i < j {
            Ok(())
        } else {
            Err(Error::Index(format!("dyad ({i}, {j}) must satisfy i < j")))
        }
    }

    /// Copy with node `v` deleted; later indices shift down by one.
    pub fn without_node(&self, v: usize) -> WeightedNetwork {
        let n = self.n();
        let mut labels = self.labels.clone();
        labels.remove(v);
        let mut w = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != v) {
            let row = self.row(i);
            w.extend(row.iter().enumerate().filter(|(j, _)| *j != v).map(|(_, x)| *x));
        }
        WeightedNetwork { labels, w }
    }

    /// Copy with every tie of node `v` set to zero.
    pub fn with_node_zeroed(&self, v: usize) -> WeightedNetwork {
        let mut out = self.clone();
        let n = self.n();
        for j in 0..n {
            out.w[v * n + j] = 0.0;
            out.w[j * n + v] = 0.0;
        }
        out
    }

    /// Relabelled copy with `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> WeightedNetwork {
        let n = self.n();
        assert_eq!(perm.len(), n);
        let labels = perm.iter().map(|&p| self.labels[p].clone()).collect();
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                w[i * n + j] = self.w[perm[i] * n + perm[j]];
            }
        }
        WeightedNetwork { labels, w }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let err = WeightedNetwork::new(labels(2), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::Asymmetry { .. }));
    }

    #[test]
    fn rejects_negative_and_diagonal() {
        let err = WeightedNetwork::new(labels(2), vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::NegativeWeight { .. }));
        let err = WeightedNetwork::new(labels(2), vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::Diagonal { .. }));
        let net = WeightedNetwork::new(labels(2), vec![vec![1e-13, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(net.weight(0, 0), 0.0);
    }

    #[test]
    fn rejects_duplicate_labels() {
        let err = WeightedNetwork::empty(vec!["a".into(), "a".into()]).unwrap_err();
        assert!(matches!(err, Error::InvalidNetwork(_)));
    }

    #[test]
    fn weighted_degree_examples() {
        let mut net = WeightedNetwork::unlabeled(4);
        assert_eq!(net.weighted_degree(3).unwrap(), 0.0);
        net.set_weight(0, 1, 2.0);
        net.set_weight(0, 2, 3.0);
        assert_eq!(net.weighted_degree(0).unwrap(), 5.0);
        assert!(matches!(net.weighted_degree(4), Err(Error::Index(_))));

        let mut star = WeightedNetwork::unlabeled(5);
        for leaf in 1..5 {
            star.set_weight(0, leaf, 1.0);
        }
        assert_eq!(star.weighted_degree(0).unwrap(), 4.0);
    }

    #[test]
    fn node_removal_keeps_labels_aligned() {
        let mut net = WeightedNetwork::unlabeled(3);
        net.set_weight(0, 1, 1.0);
        net.set_weight(1, 2, 2.0);
        let cut = net.without_node(0);
        assert_eq!(cut.labels(), &["1".to_string(), "2".to_string()]);
        assert_eq!(cut.weight(0, 1), 2.0);
        let zeroed = net.with_node_zeroed(1);
        assert_eq!(zeroed.total_weight(), 0.0);
        assert_eq!(zeroed.n(), 3);
    }
}
