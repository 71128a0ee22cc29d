//! Runs every registered dataset and compares the results with the
//! published figures.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Result;
use oscerr::{EvaluationReport, MarginPolicy, Mode, TrainConfig};

use crate::pipeline::{load_split, train_and_evaluate};
use crate::registry::RegistryEntry;

/// Margins within this many percentage points of the published one pass.
pub const MARGIN_TOLERANCE_PCT: u32 = 10;

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub modes: Vec<Mode>,
    pub margin: MarginPolicy,
    /// Overrides every entry's own cap when set.
    pub max_layers: Option<usize>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            modes: Mode::ALL.to_vec(),
            margin: MarginPolicy::Sweep,
            max_layers: None,
        }
    }
}

#[derive(Debug)]
pub enum DatasetStatus {
    Ran {
        reports: Vec<EvaluationReport>,
        layers: usize,
        /// Files whose checksum differs from the registry.
        checksum_mismatches: Vec<String>,
    },
    Missing(Vec<PathBuf>),
    Failed(String),
}

#[derive(Debug)]
pub struct DatasetRun {
    pub entry: RegistryEntry,
    pub status: DatasetStatus,
}

impl DatasetRun {
    pub fn report(&self, mode: Mode) -> Option<&EvaluationReport> {
        match &self.status {
            DatasetStatus::Ran { reports, .. } => reports.iter().find(|r| r.mode == mode),
            _ => None,
        }
    }
}

pub fn run_dataset(entry: &RegistryEntry, suite: &Path, options: &BenchOptions) -> DatasetRun {
    let status = run_inner(entry, suite, options)
        .unwrap_or_else(|e| DatasetStatus::Failed(format!("{e:#}")));
    DatasetRun {
        entry: entry.clone(),
        status,
    }
}

fn run_inner(entry: &RegistryEntry, suite: &Path, options: &BenchOptions) -> Result<DatasetStatus> {
    let missing = entry.missing_files(suite);
    if !missing.is_empty() {
        return Ok(DatasetStatus::Missing(missing));
    }
    let checksum_mismatches = entry.checksum_mismatches(suite)?;
    let split = load_split(
        &suite.join(&entry.train),
        entry.test.as_ref().map(|t| suite.join(t)).as_deref(),
        entry.split_at,
        &entry.schema,
    )?;
    let config = TrainConfig::with_max_layers(options.max_layers.unwrap_or(entry.max_layers));
    let outcome = train_and_evaluate(&entry.name, &split, &config, &options.modes, options.margin)?;
    Ok(DatasetStatus::Ran {
        reports: outcome.reports,
        layers: outcome.model.m(),
        checksum_mismatches,
    })
}

/// Runs the entries one after another, in registry order, so timings are
/// not skewed by each other.
pub fn run_suite(
    entries: &[RegistryEntry],
    suite: &Path,
    options: &BenchOptions,
) -> Vec<DatasetRun> {
    entries
        .iter()
        .map(|e| run_dataset(e, suite, options))
        .collect()
}

pub fn warnings(runs: &[DatasetRun]) -> Vec<String> {
    let mut out = Vec::new();
    for run in runs {
        let name = &run.entry.name;
        match &run.status {
            DatasetStatus::Missing(files) => {
                let files: Vec<String> = files.iter().map(|f| f.display().to_string()).collect();
                out.push(format!("skipping {name}: missing {}", files.join(", ")));
            }
            DatasetStatus::Failed(msg) => out.push(format!("{name} failed: {msg}")),
            DatasetStatus::Ran {
                checksum_mismatches,
                ..
            } => {
                for file in checksum_mismatches {
                    out.push(format!(
                        "{name}: {file} differs from the registered copy; results may not match"
                    ));
                }
            }
        }
    }
    out
}

/// One pass/fail comparison against a published figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub dataset: String,
    pub what: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {} {}: {}",
            self.dataset, self.what, self.detail
        )
    }
}

/// Oracle-mode comparisons for one dataset: correct count, best margin and
/// runtime. A dataset that did not run fails all three.
pub fn checks(run: &DatasetRun) -> Vec<Check> {
    let entry = &run.entry;
    let check = |what, passed, detail: String| Check {
        dataset: entry.name.clone(),
        what,
        passed,
        detail,
    };
    let reason = match &run.status {
        DatasetStatus::Missing(files) => {
            Some(format!("dataset unavailable ({} missing)", files.len()))
        }
        DatasetStatus::Failed(msg) => Some(format!("run failed: {msg}")),
        DatasetStatus::Ran { .. } => run
            .report(Mode::Oracle)
            .is_none()
            .then(|| "no oracle report".to_owned()),
    };
    if let Some(reason) = reason {
        return ["correct", "margin", "runtime"]
            .into_iter()
            .map(|what| check(what, false, reason.clone()))
            .collect();
    }
    let report = run.report(Mode::Oracle).expect("checked above");
    let published = &entry.published;

    let tolerance = entry.count_tolerance();
    let wrong = report.total.saturating_sub(report.correct);
    let published_wrong = published.total.saturating_sub(published.correct);
    let count = check(
        "correct",
        wrong.abs_diff(published_wrong) <= tolerance,
        format!(
            "{} from {} (published {} from {}, tolerance {tolerance} rows)",
            report.correct, report.total, published.correct, published.total
        ),
    );
    let margin = check(
        "margin",
        report.best_margin_pct.abs_diff(published.best_margin_pct) <= MARGIN_TOLERANCE_PCT,
        format!(
            "{}% (published {}%, tolerance {MARGIN_TOLERANCE_PCT} points)",
            report.best_margin_pct, published.best_margin_pct
        ),
    );
    let limit = Duration::from_secs_f64(entry.time_limit_secs);
    let runtime = report.runtime.unwrap_or_default();
    let time = check(
        "runtime",
        runtime < limit,
        format!(
            "{:.1} ms (limit {:.0} ms)",
            runtime.as_secs_f64() * 1e3,
            limit.as_secs_f64() * 1e3
        ),
    );
    vec![count, margin, time]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::find;

    fn ran(entry: &str, correct: usize, margin: u32, ms: u64) -> DatasetRun {
        let entry = find(entry).unwrap();
        let report = EvaluationReport {
            dataset: entry.name.clone(),
            mode: Mode::Oracle,
            average_error: 0.0,
            best_margin_pct: margin,
            correct,
            total: entry.published.total,
            percent_correct: 0.0,
            runtime: Some(Duration::from_millis(ms)),
            baseline_percent_correct: 0.0,
        };
        DatasetRun {
            entry,
            status: DatasetStatus::Ran {
                reports: vec![report],
                layers: 1,
                checksum_mismatches: Vec::new(),
            },
        }
    }

    fn passed(run: &DatasetRun) -> Vec<bool> {
        checks(run).iter().map(|c| c.passed).collect()
    }

    #[test]
    fn within_tolerance_passes() {
        assert_eq!(passed(&ran("iris", 150, 40, 5)), vec![true, true, true]);
        assert_eq!(passed(&ran("iris", 147, 35, 5)), vec![true, true, true]);
    }

    #[test]
    fn outside_tolerance_fails() {
        assert_eq!(
            passed(&ran("iris", 146, 34, 2500)),
            vec![false, false, false]
        );
    }

    #[test]
    fn abalone_uses_percentage_tolerance() {
        assert!(passed(&ran("abalone", 3410 - 41, 49, 5))[0]);
        assert!(!passed(&ran("abalone", 3410 - 42, 49, 5))[0]);
    }

    #[test]
    fn missing_dataset_fails_every_check() {
        let run = DatasetRun {
            entry: find("banknote").unwrap(),
            status: DatasetStatus::Missing(vec!["x".into()]),
        };
        let checks = checks(&run);
        assert_eq!(checks.len(), 3);
        assert!(checks
            .iter()
            .all(|c| !c.passed && c.detail.contains("unavailable")));
        assert_eq!(warnings(&[run]).len(), 1);
    }

    #[test]
    fn empty_suite_directory_skips_everything() {
        let dir = std::env::temp_dir().join("oscerr-empty-suite-unit");
        std::fs::create_dir_all(&dir).unwrap();
        let runs = run_suite(&crate::registry::entries(), &dir, &BenchOptions::default());
        assert!(runs
            .iter()
            .all(|r| matches!(r.status, DatasetStatus::Missing(_))));
        assert_eq!(warnings(&runs).len(), 10);
    }
}
