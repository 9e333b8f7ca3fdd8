use std::collections::{HashMap, HashSet};

use super::{ArgExpr, Plan, TABLE_VAR};
use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::toolkit::Registry;

/// Maximum number of steps a plan may contain.
pub const STEP_BUDGET: usize = 64;

fn refs(args: &[ArgExpr]) -> impl Iterator<Item = &str> {
    args.iter().filter_map(|a| match a {
        ArgExpr::VarRef(v) => Some(v.as_str()),
        ArgExpr::Lit(_) => None,
    })
}

/// Static checks against a registry. Errors make a plan non-executable;
/// warnings do not.
pub fn validate_plan(plan: &Plan, registry: &Registry) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let n = plan.steps.len();
    if n > STEP_BUDGET {
        diags.push(Diagnostic::error(
            None,
            DiagnosticKind::StepBudgetExceeded {
                steps: n,
                budget: STEP_BUDGET,
            },
        ));
    }

    let mut defined: HashSet<&str> = HashSet::from([TABLE_VAR]);
    let mut uses: HashMap<&str, usize> = HashMap::new();
    for step in &plan.steps {
        let line = Some(step.index);
        match registry.resolve(&step.tool) {
            Err(_) => diags.push(Diagnostic::error(
                line,
                DiagnosticKind::UnknownTool {
                    tool: step.tool.clone(),
                },
            )),
            Ok(spec) if spec.arity() != step.args.len() => diags.push(Diagnostic::error(
                line,
                DiagnosticKind::ArityMismatch {
                    tool: step.tool.clone(),
                    expected: spec.arity(),
                    got: step.args.len(),
                },
            )),
            Ok(_) => {}
        }
        for v in refs(&step.args) {
            *uses.entry(v).or_default() += 1;
            if !defined.contains(v) {
                diags.push(Diagnostic::error(
                    line,
                    DiagnosticKind::UseBeforeDef { var: v.to_string() },
                ));
            }
        }
        defined.insert(step.var.as_str());
    }

    if let ArgExpr::VarRef(v) = &plan.answer {
        *uses.entry(v.as_str()).or_default() += 1;
        if !defined.contains(v.as_str()) {
            diags.push(Diagnostic::error(
                Some(n + 1),
                DiagnosticKind::UseBeforeDef { var: v.clone() },
            ));
        }
    }

    for step in &plan.steps {
        if !uses.contains_key(step.var.as_str()) {
            diags.push(Diagnostic::warning(
                Some(step.index),
                DiagnosticKind::UnusedVar { var: step.var.clone() },
            ));
        }
    }
    diags
}
