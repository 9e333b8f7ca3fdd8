use std::collections::BTreeMap;

use rust_decimal::prelude::ToPrimitive;
use serde::Serialize;

use super::config::{LabelMap, ScoringConfig};
use super::record::Task;
use crate::table::parse_decimal;

fn normalize_answer(s: &str) -> String {
    let lowered = s.trim().to_lowercase();
    let stripped: String = lowered
        .chars()
        .filter(|c| !matches!(c, '$' | '€' | '£' | '¥' | ',' | '%'))
        .collect();
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn numeric(s: &str) -> Option<f64> {
    parse_decimal(s).and_then(|d| d.to_f64())
}

fn close_enough(a: f64, b: f64, tol: &ScoringConfig) -> bool {
    let diff = (a - b).abs();
    diff <= tol.abs_tol || diff <= tol.rel_tol * a.abs().max(b.abs())
}

/// Decides whether a prediction matches the gold answer.
///
/// Answers are compared after trimming, case folding, and removal of currency
/// symbols, commas, and percent signs; numeric answers are compared within
/// tolerance. Verification predictions are first mapped onto the dataset's
/// label space when a label map is given.
pub fn score(pred: &str, gold: &str, task: Task, labels: Option<&LabelMap>, tol: &ScoringConfig) -> bool {
    match task {
        Task::Tqa => {
            let (p, g) = (normalize_answer(pred), normalize_answer(gold));
            match (numeric(&p), numeric(&g)) {
                (Some(a), Some(b)) => close_enough(a, b, tol),
                _ => p == g,
            }
        }
        Task::Tfv => {
            if pred.trim().eq_ignore_ascii_case(gold.trim()) {
                return true;
            }
            let mapped = match labels {
                Some(map) => map.map(pred),
                None => pred.trim().to_string(),
            };
            mapped.trim().eq_ignore_ascii_case(gold.trim())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetMetrics {
    pub n: usize,
    pub accuracy: f64,
    pub execution_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub method: String,
    pub n: usize,
    /// Mean of per-dataset accuracies, in percent.
    pub accuracy: f64,
    /// Mean of per-dataset execution rates, in percent.
    pub execution_rate: f64,
    pub per_dataset: BTreeMap<String, DatasetMetrics>,
    pub registry_sha256: String,
}

/// Rounds to one decimal place, the precision metrics are reported at.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Rounded mean of one-decimal percentages, in exact tenths.
fn mean_tenths(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0i64, 0i64), |(s, n), v| (s + (v * 10.0).round() as i64, n + 1));
    if n == 0 {
        return 0.0;
    }
    (2 * sum + n).div_euclid(2 * n) as f64 / 10.0
}

/// Macro average of per-dataset `(accuracy, execution_rate)` pairs, rounded.
pub fn macro_average<'a>(per_dataset: impl IntoIterator<Item = &'a DatasetMetrics>) -> (f64, f64) {
    let items: Vec<&DatasetMetrics> = per_dataset.into_iter().collect();
    (
        mean_tenths(items.iter().map(|d| d.accuracy)),
        mean_tenths(items.iter().map(|d| d.execution_rate)),
    )
}

/// Per-record result fed to aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tally<'a> {
    pub dataset: &'a str,
    pub correct: bool,
    pub executable: bool,
}

pub fn aggregate(method: &str, tallies: &[Tally<'_>], registry_sha256: &str) -> Metrics {
    let mut groups: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    for t in tallies {
        let g = groups.entry(t.dataset.to_string()).or_default();
        g.0 += 1;
        g.1 += usize::from(t.correct);
        g.2 += usize::from(t.executable);
    }
    let per_dataset: BTreeMap<String, DatasetMetrics> = groups
        .into_iter()
        .map(|(ds, (n, correct, exec))| {
            let pct = |k: usize| ((2000 * k + n) / (2 * n)) as f64 / 10.0;
            (
                ds,
                DatasetMetrics {
                    n,
                    accuracy: pct(correct),
                    execution_rate: pct(exec),
                },
            )
        })
        .collect();
    let (accuracy, execution_rate) = macro_average(per_dataset.values());
    Metrics {
        method: method.to_string(),
        n: tallies.len(),
        accuracy,
        execution_rate,
        per_dataset,
        registry_sha256: registry_sha256.to_string(),
    }
}

/// `100 * a / b`, rounded to one decimal. `None` when `b` is not positive.
pub fn relative_ratio(a: f64, b: f64) -> Option<f64> {
    (b > 0.0).then(|| round1(100.0 * a / b))
}

/// Percentage change from `base` to `new`, rounded to one decimal.
pub fn relative_improvement(new: f64, base: f64) -> Option<f64> {
    (base > 0.0).then(|| round1(100.0 * (new - base) / base))
}
