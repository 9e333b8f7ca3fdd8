//! Training-data synthesis from teacher outputs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::config::Config;
use super::eval::parallel_map;
use super::record::{Record, Task};
use super::score::score;
use crate::diagnostics::has_errors;
use crate::executor::{run_toolmaker_response, solve_with_tools, ToolAttempt};
use crate::explain::{parse_explanation, validate_refs};
use crate::gateway::prompts::{build_explainer_prompt, build_formatter_prompt, build_toolmaker_prompt};
use crate::gateway::Gateway;
use crate::plan::{plan_to_python, Plan};
use crate::table::Table;
use crate::toolkit::{abstract_tools, deduplicate, normalize_name, Registry, ToolDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthModule {
    Formatter,
    Toolmaker,
    Explainer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthRecord {
    pub module: SynthModule,
    pub input: String,
    pub target: String,
    pub source_record: String,
    pub verified: bool,
}

/// Kept and dropped counts for each stage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SynthStats {
    pub generated: usize,
    pub executable: usize,
    pub verified: usize,
    pub dropped_at_verification: usize,
    pub dropped_singleton_tools: usize,
    pub dropped_at_reverification: usize,
    pub dropped_explanations: usize,
    pub formatter: usize,
    pub toolmaker: usize,
    pub explainer: usize,
    pub canonical_tools: usize,
    pub aliases: BTreeMap<String, String>,
}

struct Verified<'a> {
    record: &'a Record,
    formatted: Table,
    defs: Vec<ToolDef>,
    raw_plan: Plan,
}

fn is_correct(record: &Record, answer: &str, config: &Config) -> bool {
    let labels = config.labels.get(&record.dataset);
    let answer = match (record.task, labels) {
        (Task::Tfv, Some(map)) => map.map(answer),
        _ => answer.to_string(),
    };
    !answer.trim().is_empty() && score(&answer, &record.gold, record.task, labels, &config.scoring)
}

fn rename_def(def: &ToolDef, name: &str) -> String {
    match ToolDef::from_source(&def.source_text) {
        Some(orig) if orig.name != name => {
            def.source_text
                .replacen(&format!("def {}", orig.name), &format!("def {name}"), 1)
        }
        _ => def.source_text.clone(),
    }
}

/// Rewrites a verified solution with canonical tool names and definitions.
fn canonical_program(
    raw_plan: &Plan,
    canonical: &BTreeMap<String, ToolDef>,
    aliases: &BTreeMap<String, String>,
) -> String {
    let resolve = |t: &str| {
        let n = normalize_name(t);
        aliases.get(&n).cloned().unwrap_or(n)
    };
    let plan = raw_plan.clone().map_tools(|t| resolve(t));
    let used: BTreeSet<String> = plan.steps.iter().map(|s| s.tool.clone()).collect();
    let mut parts: Vec<String> = used
        .iter()
        .filter_map(|name| canonical.get(name).map(|d| rename_def(d, name)))
        .map(|s| s.trim_end().to_string())
        .collect();
    parts.push(plan_to_python(&plan));
    parts.join("\n\n")
}

/// Builds formatter, tool-maker, and explainer training records from a
/// teacher. Only answers matching gold survive, tools used once across the
/// corpus are dropped, and every tool-maker target is re-executed before it is
/// emitted.
pub fn synthesize(
    records: &[Record],
    gateway: &dyn Gateway,
    config: &Config,
    registry: &Registry,
) -> (Vec<SynthRecord>, SynthStats) {
    let run = config.run_config();
    let budget = run.token_budget;
    let mut stats = SynthStats {
        generated: records.len(),
        ..Default::default()
    };

    let attempts: Vec<(Table, ToolAttempt)> = parallel_map(records, config.run.parallelism, |r| {
        solve_with_tools(r, &run, gateway, registry)
    });
    let mut verified = Vec::new();
    for (record, (formatted, attempt)) in records.iter().zip(attempts) {
        if !attempt.outcome.executable {
            continue;
        }
        stats.executable += 1;
        if !is_correct(record, &attempt.outcome.answer, config) {
            continue;
        }
        let Some(raw_plan) = attempt.raw_plan else {
            continue;
        };
        verified.push(Verified {
            record,
            formatted,
            defs: attempt.defs,
            raw_plan,
        });
    }
    stats.verified = verified.len();
    stats.dropped_at_verification = stats.generated - stats.verified;

    let mut out = Vec::new();
    for v in &verified {
        let Ok(bundle) = build_formatter_prompt(&v.record.table, &v.record.query, budget) else {
            continue;
        };
        out.push(SynthRecord {
            module: SynthModule::Formatter,
            input: bundle.user,
            target: v.formatted.serialize_canonical(),
            source_record: v.record.id.clone(),
            verified: true,
        });
    }
    stats.formatter = out.len();

    let all_defs: Vec<ToolDef> = verified.iter().flat_map(|v| v.defs.clone()).collect();
    let kept_defs = abstract_tools(&all_defs, 2);
    let kept_names: BTreeSet<String> = kept_defs.iter().map(|d| normalize_name(&d.name)).collect();
    let (canonical, aliases) = deduplicate(&kept_defs);
    stats.canonical_tools = canonical.len();
    stats.aliases = aliases.clone();
    let canonical: BTreeMap<String, ToolDef> = canonical.into_iter().map(|d| (d.name.clone(), d)).collect();

    let mut toolmaker = Vec::new();
    let mut explainer = Vec::new();
    for v in &verified {
        if v.defs.iter().any(|d| !kept_names.contains(&normalize_name(&d.name))) {
            stats.dropped_singleton_tools += 1;
            continue;
        }
        let program = canonical_program(&v.raw_plan, &canonical, &aliases);
        let recheck = run_toolmaker_response(&program, &v.formatted, registry);
        let Some(plan) = recheck
            .plan
            .filter(|_| recheck.outcome.executable && is_correct(v.record, &recheck.outcome.answer, config))
        else {
            stats.dropped_at_reverification += 1;
            continue;
        };
        let Ok(bundle) =
            build_toolmaker_prompt(&v.formatted, &v.record.query, v.record.context_text.as_deref(), budget)
        else {
            stats.dropped_at_reverification += 1;
            continue;
        };
        toolmaker.push(SynthRecord {
            module: SynthModule::Toolmaker,
            input: bundle.user,
            target: program.clone(),
            source_record: v.record.id.clone(),
            verified: true,
        });

        let shown = Record {
            table: v.formatted.clone(),
            ..v.record.clone()
        };
        let explanation = build_explainer_prompt(&program, &shown, budget)
            .ok()
            .and_then(|b| gateway.complete(&b).ok().map(|text| (b.user, text)))
            .and_then(|(input, text)| {
                let text = text.trim().to_string();
                let expl = parse_explanation(&text).ok()?;
                (!has_errors(&validate_refs(&expl, &plan))).then_some((input, text))
            });
        match explanation {
            Some((input, target)) => explainer.push(SynthRecord {
                module: SynthModule::Explainer,
                input,
                target,
                source_record: v.record.id.clone(),
                verified: true,
            }),
            None => stats.dropped_explanations += 1,
        }
    }
    stats.toolmaker = toolmaker.len();
    stats.explainer = explainer.len();
    out.extend(toolmaker);
    out.extend(explainer);
    (out, stats)
}
