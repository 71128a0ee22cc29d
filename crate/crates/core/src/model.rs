//! The trained classifier and its on-disk form.
//!
//! Models are stored as versioned TOML. Reals are written in Rust's shortest
//! round-trip decimal form, so a saved model reloads bit-for-bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{CategoryCodec, LoadedDataset, NominalEncoding, Normalizer, NumericDataset};
use crate::error::{Error, Result};
use crate::kernel::CorrectionLayer;
use crate::trainer::{train, LayerStack, StopReason, TrainConfig, TrainingMeta};

pub const FORMAT_NAME: &str = "oscerr-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    layers: Vec<CorrectionLayer>,
    codec: CategoryCodec,
    normalizer: Normalizer,
    nominal: NominalEncoding,
    meta: TrainingMeta,
}

impl ClassifierModel {
    pub fn new(
        stack: LayerStack,
        codec: CategoryCodec,
        normalizer: Normalizer,
        nominal: NominalEncoding,
    ) -> Result<Self> {
        let LayerStack { layers, meta } = stack;
        if layers.is_empty() {
            return Err(Error::Format("a model needs at least one layer".into()));
        }
        let n = normalizer.len();
        if let Some(bad) = layers.iter().find(|l| l.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        if meta.prototypes.len() != codec.len() {
            return Err(Error::DimensionMismatch {
                expected: codec.len(),
                found: meta.prototypes.len(),
            });
        }
        Ok(Self {
            layers,
            codec,
            normalizer,
            nominal,
            meta,
        })
    }

    /// Fits the normalizer on the raw training data, normalizes it and trains.
    pub fn fit(training: &LoadedDataset, config: &TrainConfig) -> Result<Self> {
        let normalizer = Normalizer::fit(&training.data);
        let data = normalizer.normalize(&training.data)?;
        let stack = train(&data, &training.codec, config)?;
        Self::new(
            stack,
            training.codec.clone(),
            normalizer,
            training.nominal.clone(),
        )
    }

    pub fn layers(&self) -> &[CorrectionLayer] {
        &self.layers
    }

    pub fn codec(&self) -> &CategoryCodec {
        &self.codec
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn nominal(&self) -> &NominalEncoding {
        &self.nominal
    }

    pub fn meta(&self) -> &TrainingMeta {
        &self.meta
    }

    /// Variable count.
    pub fn n(&self) -> usize {
        self.normalizer.len()
    }

    /// Layer count.
    pub fn m(&self) -> usize {
        self.layers.len()
    }

    /// Applies the training normalizer to raw data.
    pub fn prepare(&self, raw: &NumericDataset) -> Result<NumericDataset> {
        self.normalizer.normalize(raw)
    }

    pub fn to_toml(&self) -> Result<String> {
        let file = ModelFile::from(self);
        toml::to_string(&file).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ModelFile = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    n: usize,
    categories: CategoriesSection,
    normalizer: NormalizerSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    nominal: Vec<NominalSection>,
    training: TrainingSection,
    transposition: TranspositionSection,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoriesSection {
    labels: Vec<String>,
    output_values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalizerSection {
    min: Vec<f64>,
    max: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NominalSection {
    column: usize,
    values: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainingSection {
    iterations: usize,
    final_error: f64,
    stop_reason: StopReason,
    error_history: Vec<f64>,
    prototypes: Vec<Vec<f64>>,
    final_rows: Vec<Vec<f64>>,
    category_corrections: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TranspositionSection {
    layers: Vec<Vec<f64>>,
}

fn layer_values(layers: &[CorrectionLayer]) -> Vec<Vec<f64>> {
    layers.iter().map(|l| l.values().to_vec()).collect()
}

fn to_layers(rows: Vec<Vec<f64>>) -> Result<Vec<CorrectionLayer>> {
    rows.into_iter().map(CorrectionLayer::new).collect()
}

impl From<&ClassifierModel> for ModelFile {
    fn from(model: &ClassifierModel) -> Self {
        let meta = &model.meta;
        Self {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            n: model.n(),
            categories: CategoriesSection {
                labels: model.codec.labels().to_vec(),
                output_values: model.codec.output_values().to_vec(),
            },
            normalizer: NormalizerSection {
                min: model.normalizer.min().to_vec(),
                max: model.normalizer.max().to_vec(),
            },
            nominal: model
                .nominal
                .columns()
                .iter()
                .map(|(&column, values)| NominalSection {
                    column,
                    values: values.clone(),
                })
                .collect(),
            training: TrainingSection {
                iterations: meta.iterations,
                final_error: meta.final_error(),
                stop_reason: meta.stop_reason,
                error_history: meta.error_history.clone(),
                prototypes: meta.prototypes.clone(),
                final_rows: meta.final_rows.clone(),
                category_corrections: meta
                    .category_corrections
                    .iter()
                    .map(|set| layer_values(set))
                    .collect(),
            },
            transposition: TranspositionSection {
                layers: layer_values(&model.layers),
            },
        }
    }
}

impl TryFrom<ModelFile> for ClassifierModel {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        if file.format != FORMAT_NAME {
            return Err(Error::Format(format!(
                "expected format {FORMAT_NAME:?}, found {:?}",
                file.format
            )));
        }
        if file.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported version {} (this build reads version {FORMAT_VERSION})",
                file.version
            )));
        }
        let codec = CategoryCodec::new(file.categories.labels)?;
        if codec.output_values() != file.categories.output_values.as_slice() {
            return Err(Error::Format(
                "output values do not match the evenly spaced category encoding".into(),
            ));
        }
        let normalizer = Normalizer::from_bounds(file.normalizer.min, file.normalizer.max)?;
        if normalizer.len() != file.n {
            return Err(Error::DimensionMismatch {
                expected: file.n,
                found: normalizer.len(),
            });
        }
        let nominal = NominalEncoding::new(
            file.nominal
                .into_iter()
                .map(|s| (s.column, s.values))
                .collect::<BTreeMap<_, _>>(),
        );
        let t = file.training;
        let meta = TrainingMeta {
            iterations: t.iterations,
            error_history: t.error_history,
            stop_reason: t.stop_reason,
            prototypes: t.prototypes,
            final_rows: t.final_rows,
            category_corrections: t
                .category_corrections
                .into_iter()
                .map(to_layers)
                .collect::<Result<_>>()?,
        };
        if meta.final_error().to_bits() != t.final_error.to_bits() {
            return Err(Error::Format(
                "final_error does not match the last error_history entry".into(),
            ));
        }
        let layers = to_layers(file.transposition.layers)?;
        if meta.iterations != layers.len() {
            return Err(Error::Format(format!(
                "iterations is {} but {} layers are stored",
                meta.iterations,
                layers.len()
            )));
        }
        ClassifierModel::new(LayerStack { layers, meta }, codec, normalizer, nominal)
    }
}
