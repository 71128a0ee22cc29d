//! Load, train and evaluate one dataset.

use std::fs::File;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use oscerr::{
    evaluate, load_dataset, load_dataset_with, ClassifierModel, DatasetSchema, EvaluationReport,
    LoadedDataset, MarginPolicy, Mode, NumericDataset, TrainConfig,
};

/// Training rows plus optional held-out rows, still unnormalized.
pub struct Split {
    pub train: LoadedDataset,
    pub test: Option<NumericDataset>,
}

impl Split {
    /// Rows to score: the held-out rows if any, the training rows otherwise.
    pub fn eval_rows(&self) -> &NumericDataset {
        self.test.as_ref().unwrap_or(&self.train.data)
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

pub fn load_split(
    train: &Path,
    test: Option<&Path>,
    split_at: Option<usize>,
    schema: &DatasetSchema,
) -> Result<Split> {
    let mut loaded = load_dataset(open(train)?, schema)
        .with_context(|| format!("loading {}", train.display()))?;
    let test = match (test, split_at) {
        (Some(path), _) => Some(
            load_dataset_with(open(path)?, schema, &loaded.codec, &loaded.nominal)
                .with_context(|| format!("loading {}", path.display()))?,
        ),
        (None, Some(at)) => {
            let (head, tail) = loaded.data.split_at(at)?;
            loaded.data = head;
            Some(tail)
        }
        (None, None) => None,
    };
    Ok(Split {
        train: loaded,
        test,
    })
}

pub struct Outcome {
    pub model: ClassifierModel,
    pub reports: Vec<EvaluationReport>,
    pub train_time: Duration,
}

/// Trains on the split's training rows and scores its evaluation rows once
/// per mode. Each report's runtime is training time plus that mode's
/// evaluation time.
pub fn train_and_evaluate(
    name: &str,
    split: &Split,
    config: &TrainConfig,
    modes: &[Mode],
    margin: MarginPolicy,
) -> Result<Outcome> {
    let start = Instant::now();
    let model = ClassifierModel::fit(&split.train, config)?;
    let train_time = start.elapsed();
    let reports = evaluate_model(name, &model, split.eval_rows(), modes, margin, train_time)?;
    Ok(Outcome {
        model,
        reports,
        train_time,
    })
}

/// Scores raw rows against a trained model.
pub fn evaluate_model(
    name: &str,
    model: &ClassifierModel,
    raw: &NumericDataset,
    modes: &[Mode],
    margin: MarginPolicy,
    train_time: Duration,
) -> Result<Vec<EvaluationReport>> {
    let start = Instant::now();
    let rows = model.prepare(raw)?;
    let prepare_time = start.elapsed();
    modes
        .iter()
        .map(|&mode| {
            let start = Instant::now();
            let mut report = evaluate(name, model, &rows, mode, margin)?;
            report.runtime = Some(train_time + prepare_time + start.elapsed());
            Ok(report)
        })
        .collect()
}
