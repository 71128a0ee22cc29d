//! The add/subtract correction rule and the per-row operations built on it.
//!
//! A value at or below the target has the correction added, a value above it
//! has the correction subtracted. Comparisons are exact; there is no
//! tolerance band inside the rule.

use crate::error::{Error, Result};

/// One stored transposition layer: a non-negative correction per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionLayer(Vec<f64>);

impl CorrectionLayer {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidCorrection(bad));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Element-wise mean of equally long layers.
    pub fn mean_of(layers: &[CorrectionLayer]) -> Result<Self> {
        let first = layers.first().ok_or(Error::EmptyDataset)?;
        let n = first.len();
        let mut acc = vec![0.0; n];
        for layer in layers {
            if layer.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: layer.len(),
                });
            }
            for (a, v) in acc.iter_mut().zip(&layer.0) {
                *a += v;
            }
        }
        let count = layers.len() as f64;
        Ok(Self(acc.into_iter().map(|a| a / count).collect()))
    }
}

impl From<CorrectionLayer> for Vec<f64> {
    fn from(layer: CorrectionLayer) -> Self {
        layer.0
    }
}

/// Row states through a layer stack. `states[0]` is the input row and
/// `states[i]` the row after layer `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub states: Vec<Vec<f64>>,
    pub final_output: f64,
}

#[inline]
pub fn rule_step(x: f64, ec: f64, target: f64) -> f64 {
    if x <= target {
        x + ec
    } else {
        x - ec
    }
}

pub fn transpose_row(row: &[f64], layer: &CorrectionLayer, target: f64) -> Result<Vec<f64>> {
    if row.len() != layer.len() {
        return Err(Error::DimensionMismatch {
            expected: layer.len(),
            found: row.len(),
        });
    }
    Ok(row
        .iter()
        .zip(layer.values())
        .map(|(&x, &ec)| rule_step(x, ec, target))
        .collect())
}

pub fn absolute_error(row: &[f64], target: f64) -> CorrectionLayer {
    CorrectionLayer(row.iter().map(|&x| (target - x).abs()).collect())
}

/// Mean of the final-layer variable values. Values are summed in sorted
/// order so the result does not depend on column order.
pub fn aggregate_output(row: &[f64]) -> Result<f64> {
    if row.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut sorted = row.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(sorted.iter().sum::<f64>() / row.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(values: &[f64]) -> CorrectionLayer {
        CorrectionLayer::new(values.to_vec()).unwrap()
    }

    #[test]
    fn below_target_adds() {
        assert_eq!(rule_step(3.0, 1.0, 4.0), 4.0);
    }

    #[test]
    fn above_target_subtracts() {
        assert_eq!(rule_step(8.0, 4.0, 4.0), 4.0);
    }

    #[test]
    fn tie_adds() {
        assert_eq!(rule_step(0.5, 0.25, 0.5), 0.75);
    }

    #[test]
    fn zero_correction_is_identity() {
        for (x, o) in [(3.0, 4.0), (-1.5, 0.0), (0.7, 0.7)] {
            assert_eq!(rule_step(x, 0.0, o), x);
        }
    }

    #[test]
    fn transpose_worked_example() {
        let out = transpose_row(
            &[3.0, 8.0, 5.0, 10.0, 2.0],
            &layer(&[1.0, 4.0, 1.0, 6.0, 2.0]),
            4.0,
        )
        .unwrap();
        assert_eq!(out, vec![4.0; 5]);
    }

    #[test]
    fn transpose_through_zero_layer() {
        let row = [0.1, 0.9, 0.4];
        assert_eq!(
            transpose_row(&row, &CorrectionLayer::zeros(3), 0.5).unwrap(),
            row
        );
    }

    #[test]
    fn transpose_can_cross_target() {
        let out = transpose_row(&[0.1], &layer(&[0.3]), 0.0).unwrap();
        assert_eq!(out, vec![0.1 - 0.3]);
        assert!(out[0] < 0.0);
    }

    #[test]
    fn transpose_rejects_wrong_width() {
        assert!(matches!(
            transpose_row(&[1.0, 2.0], &layer(&[1.0]), 0.0),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn absolute_error_worked_example() {
        let ec = absolute_error(&[3.0, 8.0, 5.0, 10.0, 2.0], 4.0);
        assert_eq!(ec.values(), &[1.0, 4.0, 1.0, 6.0, 2.0]);
    }

    #[test]
    fn absolute_error_at_target_is_zero() {
        assert_eq!(absolute_error(&[0.5; 4], 0.5), CorrectionLayer::zeros(4));
    }

    #[test]
    fn absolute_error_of_negative_value() {
        assert_eq!(absolute_error(&[-0.2], 0.0).values(), &[0.2]);
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate_output(&[4.0; 5]).unwrap(), 4.0);
        assert_eq!(aggregate_output(&[0.37]).unwrap(), 0.37);
        assert_eq!(aggregate_output(&[0.0, 1.0]).unwrap(), 0.5);
        assert!(aggregate_output(&[]).is_err());
    }

    #[test]
    fn layer_rejects_negative_and_non_finite() {
        assert!(CorrectionLayer::new(vec![0.1, -0.1]).is_err());
        assert!(CorrectionLayer::new(vec![f64::NAN]).is_err());
        assert!(CorrectionLayer::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn mean_of_layers() {
        let m = CorrectionLayer::mean_of(&[layer(&[0.1, 0.0]), layer(&[0.5, 1.0])]).unwrap();
        assert_eq!(m.values(), &[0.3, 0.5]);
        assert!(CorrectionLayer::mean_of(&[layer(&[0.1]), layer(&[0.1, 0.2])]).is_err());
    }
}
