use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::netcore::WeightedNetwork;

/// One row per upper-triangle dyad, in lexicographic `(i, j)` order.
#[derive(Clone, Debug)]
pub struct DyadDesign {
    pub y: Vec<f64>,
    /// `D x (q + 1)`; column 0 is the intercept.
    pub x: DMatrix<f64>,
    pub predictor_names: Vec<String>,
    pub n: usize,
    pub dyad_index: Vec<(usize, usize)>,
}

impl DyadDesign {
    pub fn dyads(&self) -> usize {
        self.y.len()
    }

    /// Number of coefficients including the intercept.
    pub fn columns(&self) -> usize {
        self.x.ncols()
    }

    /// Copy with predictor column `col` (1-based, intercept is 0) replaced.
    pub(crate) fn with_column(&self, col: usize, values: &[f64]) -> DyadDesign {
        let mut out = self.clone();
        out.x.column_mut(col).copy_from_slice(values);
        out
    }
}

/// Builds the dyadic design for `response ~ predictors`.
pub fn build_design(response: &WeightedNetwork, predictors: &[(String, &WeightedNetwork)]) -> Result<DyadDesign> {
    for (name, net) in predictors {
        if !net.same_layout(response) {
            return Err(Error::DimensionMismatch(format!(
                "predictor `{name}` does not share the response network's nodes"
            )));
        }
    }
    let dyad_index: Vec<(usize, usize)> = response.dyads().collect();
    let d = dyad_index.len();
    let p = predictors.len() + 1;
    let y = dyad_index.iter().map(|&(i, j)| response.weight(i, j)).collect();
    let x = DMatrix::from_fn(d, p, |r, c| {
        if c == 0 {
            1.0
        } else {
            let (i, j) = dyad_index[r];
            predictors[c - 1].1.weight(i, j)
        }
    });
    Ok(DyadDesign {
        y,
        x,
        predictor_names: predictors.iter().map(|(n, _)| n.clone()).collect(),
        n: response.n(),
        dyad_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_rows_and_columns() {
        let y = WeightedNetwork::unlabeled(3);
        let a = WeightedNetwork::unlabeled(3);
        let mut b = WeightedNetwork::unlabeled(3);
        b.set_weight(1, 2, 4.0);
        let design = build_design(&y, &[("a".into(), &a), ("b".into(), &b)]).unwrap();
        assert_eq!(design.dyads(), 3);
        assert_eq!(design.x.shape(), (3, 3));
        assert!(design.y.iter().all(|&v| v == 0.0));
        assert_eq!(design.dyad_index, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(design.x[(2, 2)], 4.0);
        assert!(design.x.column(0).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn collinear_predictor_still_builds() {
        let mut y = WeightedNetwork::unlabeled(4);
        y.set_weight(0, 1, 2.0);
        let design = build_design(&y, &[("y".into(), &y)]).unwrap();
        assert_eq!(design.x.column(1).iter().copied().collect::<Vec<_>>(), design.y);
    }

    #[test]
    fn mismatched_layout() {
        let y = WeightedNetwork::unlabeled(3);
        let a = WeightedNetwork::unlabeled(4);
        assert!(matches!(
            build_design(&y, &[("a".into(), &a)]),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
