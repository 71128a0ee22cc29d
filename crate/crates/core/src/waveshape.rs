//! Whole-dataset averaging descriptors, and a comparison of one global
//! averaged mapping against per-category training.

use crate::dataset::{CategoryCodec, NumericDataset};
use crate::error::{Error, Result};
use crate::inference::forward_output;
use crate::trainer::{train, train_prototypes, TrainConfig};

/// Consecutive differences of a row.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeVector {
    pub diffs: Vec<f64>,
}

/// Mean of every column over all rows, ignoring categories.
pub fn column_average(data: &NumericDataset) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut acc = vec![0.0; data.n()];
    for row in data.rows() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let k = data.len() as f64;
    Ok(acc.into_iter().map(|a| a / k).collect())
}

pub fn difference_shape(row: &[f64]) -> Result<ShapeVector> {
    if row.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: row.len(),
        });
    }
    Ok(ShapeVector {
        diffs: row.windows(2).map(|w| w[1] - w[0]).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveShapeComparison {
    /// Mean of the row targets, which is where the global mapping converges.
    pub global_target: f64,
    /// Mean `|X - O_true|` when a single stack is trained on the column
    /// average of the whole dataset.
    pub global_residual: f64,
    /// Mean `|X - O_true|` for the per-category stack, true value driving
    /// the rule.
    pub per_category_residual: f64,
}

/// Trains one stack on the whole-dataset average and one on per-category
/// prototypes, then measures how far each row's final output lands from its
/// own category value. `data` must be normalized.
pub fn compare_averaging(
    data: &NumericDataset,
    codec: &CategoryCodec,
    config: &TrainConfig,
) -> Result<WaveShapeComparison> {
    let targets = data
        .labels()
        .iter()
        .map(|&c| codec.output_value(c))
        .collect::<Result<Vec<_>>>()?;
    let global_target = targets.iter().sum::<f64>() / targets.len() as f64;

    let global = train_prototypes(vec![column_average(data)?], vec![global_target], config)?;
    let per_category = train(data, codec, config)?;

    let mut global_sum = 0.0;
    let mut category_sum = 0.0;
    for ((row, _), &o) in data.iter().zip(&targets) {
        global_sum += (forward_output(row, &global.layers, global_target)? - o).abs();
        category_sum += (forward_output(row, &per_category.layers, o)? - o).abs();
    }
    let k = data.len() as f64;
    Ok(WaveShapeComparison {
        global_target,
        global_residual: global_sum / k,
        per_category_residual: category_sum / k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_shape_examples() {
        assert_eq!(
            difference_shape(&[2.0, 8.0, 4.0, 5.0, 10.0]).unwrap().diffs,
            vec![6.0, -4.0, 1.0, 5.0]
        );
        assert_eq!(difference_shape(&[3.0; 4]).unwrap().diffs, vec![0.0; 3]);
        assert_eq!(difference_shape(&[0.0, 1.0]).unwrap().diffs, vec![1.0]);
        assert!(difference_shape(&[1.0]).is_err());
    }

    #[test]
    fn column_average_examples() {
        let one = NumericDataset::new(vec![vec![0.3, 0.7]], vec![0]).unwrap();
        assert_eq!(column_average(&one).unwrap(), vec![0.3, 0.7]);
        let two = NumericDataset::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], vec![0, 1]).unwrap();
        assert_eq!(column_average(&two).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn averaged_desired_output_of_one_two_three_is_two() {
        let outputs =
            NumericDataset::new(vec![vec![1.0], vec![2.0], vec![3.0]], vec![0, 1, 2]).unwrap();
        assert_eq!(column_average(&outputs).unwrap(), vec![2.0]);
    }

    #[test]
    fn per_category_training_beats_global_average() {
        let data = NumericDataset::new(
            vec![
                vec![0.1, 0.2],
                vec![0.15, 0.1],
                vec![0.8, 0.9],
                vec![0.9, 0.85],
            ],
            vec![0, 0, 1, 1],
        )
        .unwrap();
        let codec = CategoryCodec::from_observed(["a", "b"]).unwrap();
        let cmp = compare_averaging(&data, &codec, &TrainConfig::default()).unwrap();
        assert_eq!(cmp.global_target, 0.5);
        assert!(cmp.per_category_residual < cmp.global_residual);
    }
}
