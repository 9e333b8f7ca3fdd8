use std::collections::BTreeMap;

use super::{execute_plan, ErrorKind, ExecError, RunOutcome};
use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::formatter::{format_rules, format_table, FormatMode};
use crate::gateway::prompts::{build_cot_prompt, build_directqa_prompt, build_toolmaker_prompt};
use crate::gateway::{extract_final_answer, parse_toolmaker_output, Gateway, PromptKind};
use crate::harness::Record;
use crate::plan::{linearize_program, validate_plan, Plan};
use crate::table::Table;
use crate::toolkit::{normalize_name, register_generated, Registration, Registry, ToolDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub format_mode: FormatMode,
    /// Estimated-token budget for a serialized table inside a prompt.
    pub token_budget: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            format_mode: FormatMode::Rules,
            token_budget: 6000,
        }
    }
}

fn early(step: usize, kind: ErrorKind, message: impl Into<String>) -> RunOutcome {
    RunOutcome::failed(
        ExecError {
            step,
            kind,
            message: message.into(),
        },
        Vec::new(),
    )
}

fn diagnostic_error(d: &Diagnostic) -> ExecError {
    let kind = match &d.kind {
        DiagnosticKind::UnknownTool { .. } => ErrorKind::UnknownTool,
        DiagnosticKind::ArityMismatch { .. } => ErrorKind::ArityMismatch,
        DiagnosticKind::UseBeforeDef { .. } => ErrorKind::UnboundVariable,
        DiagnosticKind::StepBudgetExceeded { .. } => ErrorKind::StepBudgetExceeded,
        _ => ErrorKind::InvalidArgument,
    };
    ExecError {
        step: d.line.unwrap_or(0),
        kind,
        message: d.to_string(),
    }
}

/// Result of turning one tool-maker response into an outcome.
#[derive(Debug, Clone)]
pub struct ToolAttempt {
    pub outcome: RunOutcome,
    pub defs: Vec<ToolDef>,
    pub registrations: BTreeMap<String, Registration>,
    /// The `solution` function as written by the tool maker.
    pub program: Option<String>,
    /// The linearized plan with generated tool names mapped onto builtins.
    pub plan: Option<Plan>,
    /// The linearized plan with the tool maker's own tool names.
    pub raw_plan: Option<Plan>,
}

/// Parses a tool-maker response, maps its tools onto the registry, and
/// executes the resulting plan. Generated tool bodies are never run.
pub fn run_toolmaker_response(response: &str, table: &Table, registry: &Registry) -> ToolAttempt {
    let mut attempt = ToolAttempt {
        outcome: early(0, ErrorKind::NoSolution, "no solution"),
        defs: Vec::new(),
        registrations: BTreeMap::new(),
        program: None,
        plan: None,
        raw_plan: None,
    };
    let (defs, program) = match parse_toolmaker_output(response) {
        Ok(p) => p,
        Err(e) => {
            attempt.outcome = early(0, ErrorKind::NoSolution, e.to_string());
            return attempt;
        }
    };
    attempt.registrations = defs
        .iter()
        .map(|d| (normalize_name(&d.name), register_generated(d, registry)))
        .collect();
    attempt.defs = defs;
    attempt.program = Some(program.clone());

    let raw_plan = match linearize_program(&program) {
        Ok(p) => p,
        Err(e) => {
            attempt.outcome = early(0, ErrorKind::NonLinearizable, e.to_string());
            return attempt;
        }
    };
    attempt.raw_plan = Some(raw_plan.clone());
    let plan = raw_plan.map_tools(|t| match attempt.registrations.get(&normalize_name(t)) {
        Some(Registration::MappedTo(b)) => b.clone(),
        _ => t.to_string(),
    });
    attempt.plan = Some(plan.clone());

    for step in &plan.steps {
        if let Some(Registration::Rejected(reason)) = attempt.registrations.get(&normalize_name(&step.tool)) {
            attempt.outcome = early(
                step.index,
                ErrorKind::UnknownTool,
                format!("generated tool `{}` was rejected: {reason}", step.tool),
            );
            return attempt;
        }
    }
    if let Some(d) = validate_plan(&plan, registry).iter().find(|d| d.is_error()) {
        attempt.outcome = RunOutcome::failed(diagnostic_error(d), Vec::new());
        return attempt;
    }
    attempt.outcome = execute_plan(&plan, table, registry);
    attempt
}

/// Formats the table, asks the tool maker for a program, and runs it.
/// Never falls back.
pub fn solve_with_tools(
    record: &Record,
    config: &RunConfig,
    gateway: &dyn Gateway,
    registry: &Registry,
) -> (Table, ToolAttempt) {
    let formatted = match format_table(
        &record.table,
        &record.query,
        config.format_mode,
        Some((gateway, config.token_budget)),
    ) {
        Ok((t, _)) => t,
        Err(_) => format_rules(&record.table).0,
    };
    let failed = |kind, message: String| ToolAttempt {
        outcome: early(0, kind, message),
        defs: Vec::new(),
        registrations: BTreeMap::new(),
        program: None,
        plan: None,
        raw_plan: None,
    };
    let bundle = match build_toolmaker_prompt(
        &formatted,
        &record.query,
        record.context_text.as_deref(),
        config.token_budget,
    ) {
        Ok(b) => b,
        Err(e) => return (formatted, failed(ErrorKind::Prompt, e.to_string())),
    };
    match gateway.complete(&bundle) {
        Ok(response) => {
            let attempt = run_toolmaker_response(&response, &formatted, registry);
            (formatted, attempt)
        }
        Err(e) => (formatted, failed(ErrorKind::Gateway, e.to_string())),
    }
}

/// Chain-of-thought or direct answer for a record.
pub fn run_baseline(
    kind: PromptKind,
    record: &Record,
    table: &Table,
    config: &RunConfig,
    gateway: &dyn Gateway,
) -> Result<String, ExecError> {
    let build = match kind {
        PromptKind::DirectQa => build_directqa_prompt,
        _ => build_cot_prompt,
    };
    let bundle = build(
        table,
        &record.query,
        record.context_text.as_deref(),
        record.task,
        config.token_budget,
    )
    .map_err(|e| ExecError {
        step: 0,
        kind: ErrorKind::Prompt,
        message: e.to_string(),
    })?;
    let text = gateway.complete(&bundle).map_err(|e| ExecError {
        step: 0,
        kind: ErrorKind::Gateway,
        message: e.to_string(),
    })?;
    Ok(extract_final_answer(&text))
}

/// The full pipeline: tool-based solving, falling back to chain-of-thought
/// whenever the plan cannot be executed.
pub fn run_tart(record: &Record, config: &RunConfig, gateway: &dyn Gateway, registry: &Registry) -> RunOutcome {
    let (formatted, attempt) = solve_with_tools(record, config, gateway, registry);
    let mut outcome = attempt.outcome;
    if outcome.executable {
        return outcome;
    }
    outcome.fallback_used = true;
    outcome.answer = run_baseline(PromptKind::Cot, record, &formatted, config, gateway).unwrap_or_default();
    outcome
}
