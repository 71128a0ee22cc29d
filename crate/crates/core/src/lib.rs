//! Oscillating-error classifier for tabular data.
//!
//! Training groups rows by category, averages each group into a prototype
//! and builds a stack of transposition layers. Each layer holds one
//! non-negative correction per variable. A value at or below its target has
//! the correction added, a value above it has the correction subtracted, so
//! values far from the target keep moving towards it while values near it
//! oscillate around it with shrinking steps. The final output of a row is
//! the mean of its variables after the last layer.
//!
//! - [`dataset`]: delimited-text ingest, min-max normalization, category codec
//! - [`kernel`]: the add/subtract rule and per-row operations
//! - [`trainer`]: prototype building and layer construction
//! - [`model`]: the trained classifier and its TOML form
//! - [`inference`]: forward passes, oracle and hypothesis modes, margins
//! - [`evaluation`]: metrics, margin sweep, baseline, report tables
//! - [`waveshape`]: whole-dataset averaging descriptors

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod inference;
pub mod kernel;
pub mod model;
pub mod trainer;
pub mod waveshape;

pub use dataset::{
    fit_normalizer, load_dataset, load_dataset_with, normalize, CategoryCodec, DatasetSchema,
    LoadedDataset, NominalEncoding, Normalizer, NumericDataset,
};
pub use error::{Error, Result};
pub use evaluation::{
    accuracy_at_margin, average_error, evaluate, margin_sweep, nearest_prototype_baseline,
    render_report, reports_from_csv, reports_to_csv, EvaluationReport, MarginPolicy, MarginSweep,
};
pub use inference::{
    classify_hypothesis, forward, forward_output, score_oracle, within_margin, Mode, Prediction,
};
pub use kernel::{
    absolute_error, aggregate_output, rule_step, transpose_row, CorrectionLayer, ForwardTrace,
};
pub use model::ClassifierModel;
pub use trainer::{
    build_prototypes, total_error, train, train_iteration, train_prototypes, CorrectionSource,
    LayerStack, StopReason, TrainConfig, TrainingMeta, TrainingState,
};
pub use waveshape::{
    column_average, compare_averaging, difference_shape, ShapeVector, WaveShapeComparison,
};
