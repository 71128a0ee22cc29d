//! Layer-stack construction.
//!
//! Rows are grouped by category and averaged into one prototype per
//! category. The first stored layer is the category-averaged absolute error
//! of the raw prototypes. Each following iteration transposes every
//! prototype through the previous layer (using that category's output value
//! as the target), measures the per-category absolute error and stores its
//! average across categories as the next layer.

use serde::{Deserialize, Serialize};

use crate::dataset::{CategoryCodec, NumericDataset};
use crate::error::{Error, Result};
use crate::kernel::{absolute_error, transpose_row, CorrectionLayer};

/// Which correction a category applies during training iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionSource {
    /// The stored cross-category average of the previous iteration.
    #[default]
    Averaged,
    /// The category's own correction from the previous iteration. Only
    /// changes training; inference always uses the stored averages.
    PerCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub max_layers: usize,
    /// Training stops once the relative drop in total error falls below this.
    pub plateau_threshold: f64,
    pub plateau_enabled: bool,
    #[serde(default)]
    pub correction_source: CorrectionSource,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_layers: 10,
            plateau_threshold: 1e-9,
            plateau_enabled: true,
            correction_source: CorrectionSource::Averaged,
        }
    }
}

impl TrainConfig {
    pub fn with_max_layers(max_layers: usize) -> Self {
        Self {
            max_layers,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_layers == 0 {
            return Err(Error::Config("max_layers must be at least 1".into()));
        }
        if !(self.plateau_threshold >= 0.0 && self.plateau_threshold.is_finite()) {
            return Err(Error::Config(format!(
                "plateau_threshold must be a finite non-negative number, got {}",
                self.plateau_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxLayers,
    ZeroError,
    Plateau,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::MaxLayers => "max-layers",
            StopReason::ZeroError => "zero-error",
            StopReason::Plateau => "plateau",
        }
    }
}

/// Transposed prototypes and the corrections measured so far.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingState {
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
    corrections: Vec<Vec<CorrectionLayer>>,
    error_history: Vec<f64>,
}

impl TrainingState {
    /// Starts from raw prototypes, one per category, with their target
    /// output values. No corrections have been measured yet.
    pub fn new(prototypes: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        let n = prototypes.first().ok_or(Error::EmptyDataset)?.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if targets.len() != prototypes.len() {
            return Err(Error::DimensionMismatch {
                expected: prototypes.len(),
                found: targets.len(),
            });
        }
        if let Some(bad) = prototypes.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self {
            rows: prototypes,
            targets,
            corrections: Vec::new(),
            error_history: Vec::new(),
        })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Per-category corrections, one entry per iteration.
    pub fn corrections(&self) -> &[Vec<CorrectionLayer>] {
        &self.corrections
    }

    pub fn error_history(&self) -> &[f64] {
        &self.error_history
    }

    pub fn n(&self) -> usize {
        self.rows[0].len()
    }

    fn record(mut self, per_category: Vec<CorrectionLayer>) -> Result<(CorrectionLayer, Self)> {
        let layer = CorrectionLayer::mean_of(&per_category)?;
        self.error_history.push(total_error(&per_category));
        self.corrections.push(per_category);
        Ok((layer, self))
    }

    fn measure(&self) -> Vec<CorrectionLayer> {
        self.rows
            .iter()
            .zip(&self.targets)
            .map(|(row, &o)| absolute_error(row, o))
            .collect()
    }
}

/// Sum of every entry over every category.
pub fn total_error(corrections: &[CorrectionLayer]) -> f64 {
    corrections.iter().map(CorrectionLayer::sum).sum()
}

/// Column-wise mean of each category's rows, in category order.
pub fn build_prototypes(
    data: &NumericDataset,
    codec: &CategoryCodec,
) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut sums = vec![vec![0.0; data.n()]; codec.len()];
    let mut counts = vec![0usize; codec.len()];
    for (row, label) in data.iter() {
        let sum = sums
            .get_mut(label)
            .ok_or(Error::CategoryOutOfRange(label))?;
        for (s, v) in sum.iter_mut().zip(row) {
            *s += v;
        }
        counts[label] += 1;
    }
    sums.into_iter()
        .zip(counts)
        .enumerate()
        .map(|(c, (sum, count))| {
            if count == 0 {
                let label = codec.label(c).unwrap_or_default().to_owned();
                return Err(Error::EmptyCategory(label));
            }
            let k = count as f64;
            Ok((c, sum.into_iter().map(|s| s / k).collect()))
        })
        .collect()
}

/// Measures the raw prototypes and returns the first stored layer.
pub fn initial_layer(state: TrainingState) -> Result<(CorrectionLayer, TrainingState)> {
    let per_category = state.measure();
    state.record(per_category)
}

/// One iteration: transposes every category row through `prev_layer`, then
/// measures and averages the new corrections.
pub fn train_iteration(
    state: TrainingState,
    prev_layer: &CorrectionLayer,
) -> Result<(CorrectionLayer, TrainingState)> {
    advance(state, |_| prev_layer)
}

fn advance<'a, F>(
    mut state: TrainingState,
    correction_for: F,
) -> Result<(CorrectionLayer, TrainingState)>
where
    F: Fn(usize) -> &'a CorrectionLayer,
{
    let rows = state
        .rows
        .iter()
        .zip(&state.targets)
        .enumerate()
        .map(|(c, (row, &o))| transpose_row(row, correction_for(c), o))
        .collect::<Result<Vec<_>>>()?;
    state.rows = rows;
    let per_category = state.measure();
    state.record(per_category)
}

/// Output of training: the stored layers plus what happened along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub layers: Vec<CorrectionLayer>,
    pub meta: TrainingMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    pub iterations: usize,
    pub error_history: Vec<f64>,
    pub stop_reason: StopReason,
    /// Raw category prototypes in the training data's normalized space.
    pub prototypes: Vec<Vec<f64>>,
    /// Category rows after the last iteration.
    pub final_rows: Vec<Vec<f64>>,
    /// Per-category corrections for every stored layer. Not used at
    /// inference.
    pub category_corrections: Vec<Vec<CorrectionLayer>>,
}

impl TrainingMeta {
    pub fn final_error(&self) -> f64 {
        self.error_history.last().copied().unwrap_or(0.0)
    }
}

/// Trains from explicit prototypes and targets. Any number of categories is
/// accepted, including one, and targets need not lie in `[0, 1]`.
pub fn train_prototypes(
    prototypes: Vec<Vec<f64>>,
    targets: Vec<f64>,
    config: &TrainConfig,
) -> Result<LayerStack> {
    config.validate()?;
    let state = TrainingState::new(prototypes.clone(), targets)?;
    let (first, mut state) = initial_layer(state)?;
    let mut layers = vec![first];

    let stop_reason = loop {
        if let Some(reason) = should_stop(state.error_history(), config) {
            break reason;
        }
        if layers.len() >= config.max_layers {
            break StopReason::MaxLayers;
        }
        let prev = layers.last().expect("at least one layer");
        let (layer, next) = match config.correction_source {
            CorrectionSource::Averaged => train_iteration(state, prev)?,
            CorrectionSource::PerCategory => {
                let last = state.corrections.last().cloned().expect("measured");
                advance(state, |c| &last[c])?
            }
        };
        state = next;
        layers.push(layer);
    };

    let TrainingState {
        rows,
        corrections,
        error_history,
        ..
    } = state;
    Ok(LayerStack {
        meta: TrainingMeta {
            iterations: layers.len(),
            error_history,
            stop_reason,
            prototypes,
            final_rows: rows,
            category_corrections: corrections,
        },
        layers,
    })
}

fn should_stop(history: &[f64], config: &TrainConfig) -> Option<StopReason> {
    if !config.plateau_enabled {
        return None;
    }
    let current = *history.last()?;
    if current == 0.0 {
        return Some(StopReason::ZeroError);
    }
    let previous = *history.iter().rev().nth(1)?;
    let improvement = (previous - current) / previous.max(f64::MIN_POSITIVE);
    (improvement < config.plateau_threshold).then_some(StopReason::Plateau)
}

/// Trains on normalized data with one prototype per category of `codec`.
pub fn train(
    data: &NumericDataset,
    codec: &CategoryCodec,
    config: &TrainConfig,
) -> Result<LayerStack> {
    let prototypes = build_prototypes(data, codec)?;
    let targets = prototypes
        .iter()
        .map(|(c, _)| codec.output_value(*c))
        .collect::<Result<Vec<_>>>()?;
    let prototypes = prototypes.into_iter().map(|(_, p)| p).collect();
    train_prototypes(prototypes, targets, config)
}
