use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use super::config::Config;
use super::record::{Record, Task};
use super::score::{aggregate, score, Metrics, Tally};
use crate::executor::{run_baseline, run_tart, RunConfig, RunOutcome};
use crate::gateway::{Gateway, PromptKind};
use crate::toolkit::Registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tart,
    Cot,
    DirectQa,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Tart => "tart",
            Method::Cot => "cot",
            Method::DirectQa => "directqa",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tart" => Ok(Method::Tart),
            "cot" => Ok(Method::Cot),
            "directqa" => Ok(Method::DirectQa),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordResult {
    pub id: String,
    pub dataset: String,
    pub task: Task,
    pub gold: String,
    pub correct: bool,
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub metrics: Metrics,
    pub results: Vec<RecordResult>,
}

impl Config {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            format_mode: self.run.format_mode,
            token_budget: self.gateway.token_budget,
        }
    }
}

/// Applies `f` to every item on up to `parallelism` threads, keeping input order.
pub(crate) fn parallel_map<T: Sync, R: Send>(items: &[T], parallelism: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = parallelism.clamp(1, items.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else {
                    break;
                };
                let r = f(item);
                slots.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

/// Answers one record and scores it.
pub fn evaluate_record(
    record: &Record,
    method: Method,
    gateway: &dyn Gateway,
    config: &Config,
    registry: &Registry,
) -> RecordResult {
    let run = config.run_config();
    let mut outcome = match method {
        Method::Tart => run_tart(record, &run, gateway, registry),
        Method::Cot | Method::DirectQa => {
            let kind = if method == Method::Cot {
                PromptKind::Cot
            } else {
                PromptKind::DirectQa
            };
            match run_baseline(kind, record, &record.table, &run, gateway) {
                Ok(answer) => RunOutcome {
                    answer,
                    executable: false,
                    fallback_used: false,
                    trace: Vec::new(),
                    error: None,
                },
                Err(e) => RunOutcome::failed(e, Vec::new()),
            }
        }
    };
    let labels = config.labels.get(&record.dataset);
    if record.task == Task::Tfv {
        if let Some(map) = labels {
            outcome.answer = map.map(&outcome.answer);
        }
    }
    let correct =
        !outcome.answer.trim().is_empty() && score(&outcome.answer, &record.gold, record.task, labels, &config.scoring);
    RecordResult {
        id: record.id.clone(),
        dataset: record.dataset.clone(),
        task: record.task,
        gold: record.gold.clone(),
        correct,
        outcome,
    }
}

/// Runs a method over all records. Results are ordered by record id, so the
/// report does not depend on the degree of parallelism.
pub fn evaluate(
    records: &[Record],
    method: Method,
    gateway: &dyn Gateway,
    config: &Config,
    registry: &Registry,
) -> EvalReport {
    let mut results = parallel_map(records, config.run.parallelism, |r| {
        evaluate_record(r, method, gateway, config, registry)
    });
    results.sort_by(|a, b| a.id.cmp(&b.id));
    let tallies: Vec<Tally<'_>> = results
        .iter()
        .map(|r| Tally {
            dataset: &r.dataset,
            correct: r.correct,
            executable: r.outcome.executable,
        })
        .collect();
    let metrics = aggregate(&method.to_string(), &tallies, &registry.content_hash());
    EvalReport { metrics, results }
}
