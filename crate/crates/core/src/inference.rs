//! Running rows through a trained layer stack.
//!
//! The correction rule needs a target output value to decide between adding
//! and subtracting, which an unlabeled row does not have. Two modes are
//! provided:
//!
//! * [`Mode::Oracle`] drives the rule with the row's true category value.
//!   This is how the published evaluation protocol scores rows.
//! * [`Mode::Hypothesis`] runs the row once per category, using that
//!   category's value as the target, and picks the category whose final
//!   output lands closest to its own value. Ties go to the lowest index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{aggregate_output, rule_step, transpose_row, CorrectionLayer, ForwardTrace};
use crate::model::ClassifierModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Oracle,
    Hypothesis,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Oracle, Mode::Hypothesis];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Oracle => "oracle",
            Mode::Hypothesis => "hypothesis",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "oracle" => Ok(Mode::Oracle),
            "hypothesis" => Ok(Mode::Hypothesis),
            other => Err(format!(
                "unknown mode {other:?}, expected oracle or hypothesis"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub category: usize,
    pub final_output: f64,
    /// `|final_output - O|` for the category value that drove the rule.
    pub residual: f64,
    pub mode: Mode,
    /// Residual under each category hypothesis; empty in oracle mode.
    pub hypothesis_residuals: Vec<f64>,
}

/// Applies every layer in order with target `target`, keeping each state.
pub fn forward(row: &[f64], layers: &[CorrectionLayer], target: f64) -> Result<ForwardTrace> {
    let mut states = Vec::with_capacity(layers.len() + 1);
    states.push(row.to_vec());
    for layer in layers {
        let next = transpose_row(states.last().expect("non-empty"), layer, target)?;
        states.push(next);
    }
    let final_output = aggregate_output(states.last().expect("non-empty"))?;
    Ok(ForwardTrace {
        states,
        final_output,
    })
}

/// Final output only. Each variable passes through the stack independently,
/// so no intermediate rows are materialized.
pub fn forward_output(row: &[f64], layers: &[CorrectionLayer], target: f64) -> Result<f64> {
    if row.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(bad) = layers.iter().find(|l| l.len() != row.len()) {
        return Err(Error::DimensionMismatch {
            expected: bad.len(),
            found: row.len(),
        });
    }
    let last: Vec<f64> = row
        .iter()
        .enumerate()
        .map(|(j, &x0)| {
            layers
                .iter()
                .fold(x0, |x, layer| rule_step(x, layer.values()[j], target))
        })
        .collect();
    aggregate_output(&last)
}

pub fn classify_hypothesis(row: &[f64], model: &ClassifierModel) -> Result<Prediction> {
    let codec = model.codec();
    let mut outputs = Vec::with_capacity(codec.len());
    let mut residuals = Vec::with_capacity(codec.len());
    for &o in codec.output_values() {
        let x = forward_output(row, model.layers(), o)?;
        outputs.push(x);
        residuals.push((x - o).abs());
    }
    let mut best = 0;
    for (c, r) in residuals.iter().enumerate() {
        if *r < residuals[best] {
            best = c;
        }
    }
    Ok(Prediction {
        category: best,
        final_output: outputs[best],
        residual: residuals[best],
        mode: Mode::Hypothesis,
        hypothesis_residuals: residuals,
    })
}

/// Scores a row with its true category value driving the rule. The reported
/// category is the one whose value is nearest the final output.
pub fn score_oracle(
    row: &[f64],
    model: &ClassifierModel,
    true_category: usize,
) -> Result<Prediction> {
    let o = model.codec().output_value(true_category)?;
    let x = forward_output(row, model.layers(), o)?;
    Ok(Prediction {
        category: model.codec().nearest(x),
        final_output: x,
        residual: (x - o).abs(),
        mode: Mode::Oracle,
        hypothesis_residuals: Vec::new(),
    })
}

pub fn predict(
    row: &[f64],
    model: &ClassifierModel,
    true_category: usize,
    mode: Mode,
) -> Result<Prediction> {
    match mode {
        Mode::Oracle => score_oracle(row, model, true_category),
        Mode::Hypothesis => classify_hypothesis(row, model),
    }
}

/// Inclusive band `[o - h, o + h]` with `h = gap * margin_pct / 100`.
pub fn margin_band(o_c: f64, gap: f64, margin_pct: u32) -> (f64, f64) {
    let half = gap * f64::from(margin_pct) / 100.0;
    (o_c - half, o_c + half)
}

/// Whether `x` lies within `margin_pct` percent of the category gap around
/// `o_c`.
pub fn within_margin(x: f64, o_c: f64, gap: f64, margin_pct: u32) -> bool {
    let (lo, hi) = margin_band(o_c, gap, margin_pct);
    lo <= x && x <= hi
}
