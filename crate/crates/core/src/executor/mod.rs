//! Plan interpretation and the end-to-end answer pipeline.

mod builtins;
mod pipeline;
mod value;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::plan::{ArgExpr, Plan, STEP_BUDGET, TABLE_VAR};
use crate::table::Table;
use crate::toolkit::Registry;

pub use pipeline::{run_baseline, run_tart, run_toolmaker_response, solve_with_tools, RunConfig, ToolAttempt};
pub use value::{coerce, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    UnknownTool,
    ArityMismatch,
    TypeMismatch,
    ColumnNotFound,
    RowNotFound,
    IndexOutOfBounds,
    DivByZero,
    UnboundVariable,
    EmptyInput,
    InvalidArgument,
    StepBudgetExceeded,
    /// The gateway failed before a plan existed.
    Gateway,
    /// The prompt could not be built.
    Prompt,
    /// The tool maker's response had no `solution` function.
    NoSolution,
    /// The solution code is not straight-line tool calls.
    NonLinearizable,
}

/// Failure of one tool call, before the step index is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepError {
    pub kind: ErrorKind,
    pub message: String,
}

impl StepError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        StepError {
            kind,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecError {
    /// Plan line of the failure; 0 when no plan was produced.
    pub step: usize,
    pub kind: ErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: usize,
    pub tool: String,
    pub args: Vec<String>,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub answer: String,
    pub executable: bool,
    pub fallback_used: bool,
    pub trace: Vec<TraceEntry>,
    pub error: Option<ExecError>,
}

impl RunOutcome {
    pub fn failed(error: ExecError, trace: Vec<TraceEntry>) -> RunOutcome {
        RunOutcome {
            answer: String::new(),
            executable: false,
            fallback_used: false,
            trace,
            error: Some(error),
        }
    }
}

fn lookup<'a>(
    env: &'a HashMap<String, Value>,
    expr: &ArgExpr,
    owned: &'a mut Option<Value>,
) -> Result<&'a Value, StepError> {
    match expr {
        ArgExpr::VarRef(v) => env
            .get(v)
            .ok_or_else(|| StepError::new(ErrorKind::UnboundVariable, format!("`{v}` is not bound"))),
        ArgExpr::Lit(l) => Ok(owned.insert(Value::from_literal(l)?)),
    }
}

/// Runs a plan over a formatted table. The first failing step halts the run.
pub fn execute_plan(plan: &Plan, table: &Table, registry: &Registry) -> RunOutcome {
    if plan.steps.len() > STEP_BUDGET {
        return RunOutcome::failed(
            ExecError {
                step: STEP_BUDGET + 1,
                kind: ErrorKind::StepBudgetExceeded,
                message: format!("{} steps exceed the budget of {STEP_BUDGET}", plan.steps.len()),
            },
            Vec::new(),
        );
    }
    let mut env: HashMap<String, Value> = HashMap::new();
    env.insert(TABLE_VAR.to_string(), Value::Table(table.clone()));
    let mut trace = Vec::with_capacity(plan.steps.len());

    for step in &plan.steps {
        let fail = |e: StepError| ExecError {
            step: step.index,
            kind: e.kind,
            message: e.message,
        };
        let result = (|| {
            let spec = registry
                .resolve(&step.tool)
                .map_err(|_| StepError::new(ErrorKind::UnknownTool, format!("unknown tool `{}`", step.tool)))?;
            if spec.arity() != step.args.len() {
                return Err(StepError::new(
                    ErrorKind::ArityMismatch,
                    format!(
                        "`{}` takes {} argument(s), got {}",
                        spec.name,
                        spec.arity(),
                        step.args.len()
                    ),
                ));
            }
            let mut rendered = Vec::with_capacity(step.args.len());
            let mut coerced = Vec::with_capacity(step.args.len());
            for (arg, param) in step.args.iter().zip(&spec.params) {
                let mut owned = None;
                let v = lookup(&env, arg, &mut owned)?;
                rendered.push(v.to_string());
                coerced.push(
                    coerce(v, param.kind)
                        .map_err(|e| StepError::new(e.kind, format!("argument `{}`: {}", param.name, e.message)))?,
                );
            }
            let out = builtins::call(&spec.name, &coerced)?;
            Ok((spec.name.clone(), rendered, out))
        })();
        match result {
            Ok((tool, args, value)) => {
                trace.push(TraceEntry {
                    step: step.index,
                    tool,
                    args,
                    result: value.to_string(),
                });
                env.insert(step.var.clone(), value);
            }
            Err(e) => return RunOutcome::failed(fail(e), trace),
        }
    }

    let mut owned = None;
    match lookup(&env, &plan.answer, &mut owned) {
        Ok(v) => RunOutcome {
            answer: v.render(),
            executable: true,
            fallback_used: false,
            trace,
            error: None,
        },
        Err(e) => RunOutcome::failed(
            ExecError {
                step: plan.steps.len() + 1,
                kind: e.kind,
                message: e.message,
            },
            trace,
        ),
    }
}
