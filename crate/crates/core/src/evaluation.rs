//! Metrics and report tables.
//!
//! A row counts as correct at margin `m` when its predicted category is the
//! true one and the final output lies within `m` percent of the category gap
//! around the true category's value. Margins are swept over whole percents
//! from 0 to 49.

use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::dataset::{CategoryCodec, NumericDataset};
use crate::error::{Error, Result};
use crate::inference::{predict, score_oracle, within_margin, Mode, Prediction};
use crate::model::ClassifierModel;
use crate::trainer::build_prototypes;

pub const MAX_MARGIN_PCT: u32 = 49;

/// A prediction paired with the row's true category.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRow {
    pub truth: usize,
    pub prediction: Prediction,
}

pub fn score_rows(
    model: &ClassifierModel,
    data: &NumericDataset,
    mode: Mode,
) -> Result<Vec<ScoredRow>> {
    data.iter()
        .map(|(row, truth)| {
            Ok(ScoredRow {
                truth,
                prediction: predict(row, model, truth, mode)?,
            })
        })
        .collect()
}

fn correct_at(scores: &[ScoredRow], codec: &CategoryCodec, margin_pct: u32) -> usize {
    scores
        .iter()
        .filter(|s| {
            s.prediction.category == s.truth
                && codec.output_value(s.truth).is_ok_and(|o| {
                    within_margin(s.prediction.final_output, o, codec.gap(), margin_pct)
                })
        })
        .count()
}

/// Mean of `X - O_true` over rows, with the true value driving the rule.
pub fn average_error(model: &ClassifierModel, data: &NumericDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut sum = 0.0;
    for (row, truth) in data.iter() {
        let p = score_oracle(row, model, truth)?;
        sum += p.final_output - model.codec().output_value(truth)?;
    }
    Ok(sum / data.len() as f64)
}

/// `(correct, total)` at a single margin.
pub fn accuracy_at_margin(
    model: &ClassifierModel,
    data: &NumericDataset,
    margin_pct: u32,
    mode: Mode,
) -> Result<(usize, usize)> {
    check_margin(margin_pct)?;
    let scores = score_rows(model, data, mode)?;
    Ok((correct_at(&scores, model.codec(), margin_pct), scores.len()))
}

fn check_margin(margin_pct: u32) -> Result<()> {
    if margin_pct > MAX_MARGIN_PCT {
        return Err(Error::Config(format!(
            "margin {margin_pct}% is above the {MAX_MARGIN_PCT}% cap"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginSweep {
    /// Smallest margin reaching the highest correct count.
    pub best_margin_pct: u32,
    pub correct: usize,
    pub total: usize,
    /// Correct count at every margin from 0 to 49.
    pub counts: Vec<usize>,
}

impl MarginSweep {
    pub fn from_scores(scores: &[ScoredRow], codec: &CategoryCodec) -> Self {
        let counts: Vec<usize> = (0..=MAX_MARGIN_PCT)
            .map(|m| correct_at(scores, codec, m))
            .collect();
        let mut best = 0;
        for (m, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = m;
            }
        }
        Self {
            best_margin_pct: best as u32,
            correct: counts[best],
            total: scores.len(),
            counts,
        }
    }
}

pub fn margin_sweep(
    model: &ClassifierModel,
    data: &NumericDataset,
    mode: Mode,
) -> Result<MarginSweep> {
    let scores = score_rows(model, data, mode)?;
    Ok(MarginSweep::from_scores(&scores, model.codec()))
}

/// Index of the prototype nearest `row` in Euclidean distance; ties go to
/// the lowest index.
pub fn nearest_prototype(row: &[f64], prototypes: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (c, p) in prototypes.iter().enumerate() {
        let d: f64 = row.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_dist {
            best = c;
            best_dist = d;
        }
    }
    best
}

fn percent(correct: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * correct as f64 / total as f64
    }
}

fn prototype_accuracy(prototypes: &[Vec<f64>], test: &NumericDataset) -> f64 {
    let correct = test
        .iter()
        .filter(|(row, truth)| nearest_prototype(row, prototypes) == *truth)
        .count();
    percent(correct, test.len())
}

/// Percent of test rows whose nearest category prototype (built from the
/// training rows) is their own category.
pub fn nearest_prototype_baseline(
    train: &NumericDataset,
    test: &NumericDataset,
    codec: &CategoryCodec,
) -> Result<f64> {
    if train.n() != test.n() {
        return Err(Error::DimensionMismatch {
            expected: train.n(),
            found: test.n(),
        });
    }
    let prototypes: Vec<Vec<f64>> = build_prototypes(train, codec)?
        .into_iter()
        .map(|(_, p)| p)
        .collect();
    Ok(prototype_accuracy(&prototypes, test))
}

/// One line of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub mode: Mode,
    pub average_error: f64,
    pub best_margin_pct: u32,
    pub correct: usize,
    pub total: usize,
    pub percent_correct: f64,
    #[serde(rename = "runtime_ns", with = "runtime_ns")]
    pub runtime: Option<Duration>,
    pub baseline_percent_correct: f64,
}

/// Which margin a report uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginPolicy {
    Sweep,
    Fixed(u32),
}

/// Evaluates `data` (already normalized with the model's normalizer). The
/// baseline uses the prototypes stored in the model.
pub fn evaluate(
    dataset: &str,
    model: &ClassifierModel,
    data: &NumericDataset,
    mode: Mode,
    margin: MarginPolicy,
) -> Result<EvaluationReport> {
    if data.n() != model.n() {
        return Err(Error::DimensionMismatch {
            expected: model.n(),
            found: data.n(),
        });
    }
    let scores = score_rows(model, data, mode)?;
    let (best_margin_pct, correct) = match margin {
        MarginPolicy::Sweep => {
            let sweep = MarginSweep::from_scores(&scores, model.codec());
            (sweep.best_margin_pct, sweep.correct)
        }
        MarginPolicy::Fixed(m) => {
            check_margin(m)?;
            (m, correct_at(&scores, model.codec(), m))
        }
    };
    Ok(EvaluationReport {
        dataset: dataset.to_owned(),
        mode,
        average_error: average_error(model, data)?,
        best_margin_pct,
        correct,
        total: scores.len(),
        percent_correct: percent(correct, scores.len()),
        runtime: None,
        baseline_percent_correct: prototype_accuracy(&model.meta().prototypes, data),
    })
}

mod runtime_ns {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(d) => s.serialize_some(&u64::try_from(d.as_nanos()).unwrap_or(u64::MAX)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        let ns: Option<u64> = Option::deserialize(d)?;
        Ok(ns.map(Duration::from_nanos))
    }
}

const HEADERS: [&str; 8] = [
    "Dataset",
    "Average Error",
    "Best % Error Margin",
    "Correctly Classified",
    "% Correct",
    "Mode",
    "Baseline % Correct",
    "Runtime",
];

fn format_cells(r: &EvaluationReport) -> [String; 8] {
    [
        r.dataset.clone(),
        format!("{:.3}", r.average_error),
        format!("{}%", r.best_margin_pct),
        format!("{} from {}", r.correct, r.total),
        format!("{:.1}%", r.percent_correct),
        r.mode.to_string(),
        format!("{:.1}%", r.baseline_percent_correct),
        match r.runtime {
            Some(d) => format!("{:.1} ms", d.as_secs_f64() * 1000.0),
            None => "-".into(),
        },
    ]
}

/// Aligned text table, one line per report, followed by a comparison of
/// hypothesis mode against the nearest-prototype baseline when any
/// hypothesis rows are present.
pub fn render_report(reports: &[EvaluationReport]) -> String {
    let rows: Vec<[String; 8]> = reports.iter().map(format_cells).collect();
    let mut widths = HEADERS.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&HEADERS);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(&rule.iter().map(String::as_str).collect::<Vec<_>>());
    for row in &rows {
        line(&row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    if let Some(note) = baseline_note(reports) {
        out.push('\n');
        out.push_str(&note);
    }
    out
}

/// Summary of how hypothesis mode compares with the nearest-prototype
/// baseline. `None` when no hypothesis rows are present.
pub fn baseline_note(reports: &[EvaluationReport]) -> Option<String> {
    let hyp: Vec<&EvaluationReport> = reports
        .iter()
        .filter(|r| r.mode == Mode::Hypothesis)
        .collect();
    if hyp.is_empty() {
        return None;
    }
    let wins = hyp
        .iter()
        .filter(|r| r.percent_correct > r.baseline_percent_correct)
        .count();
    let mut note = format!(
        "hypothesis mode beats the nearest-prototype baseline on {wins} of {} datasets\n",
        hyp.len()
    );
    if 2 * wins < hyp.len() {
        note.push_str(
            "note: hypothesis mode trails the baseline on most datasets; a row run under the \
             wrong category's target can still converge onto that target, so the oracle-mode \
             figures depend on knowing the true category\n",
        );
    }
    Some(note)
}

/// Machine-readable report: CSV with a header row and a stable column order.
pub fn reports_to_csv(reports: &[EvaluationReport]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if reports.is_empty() {
        writer.write_record([
            "dataset",
            "mode",
            "average_error",
            "best_margin_pct",
            "correct",
            "total",
            "percent_correct",
            "runtime_ns",
            "baseline_percent_correct",
        ])?;
    }
    for r in reports {
        writer.serialize(r)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn reports_from_csv(text: &str) -> Result<Vec<EvaluationReport>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
