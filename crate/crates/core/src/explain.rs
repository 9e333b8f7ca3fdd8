//! Explanations with embedded call references.
//!
//! Wire form: free text with islands such as `<<<###1 ;;; ###2>>>`, each
//! naming 1-based plan lines.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::executor::RunOutcome;
use crate::plan::Plan;

const OPEN: &str = "<<<";
const CLOSE: &str = ">>>";
const SEP: &str = ";;;";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Text(String),
    CallRef(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Explanation {
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error("malformed call reference at byte {position}: {message}")]
    MalformedRef { position: usize, message: String },
    #[error("results were requested but the plan did not execute")]
    TraceMissing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderMode {
    /// Calls only.
    #[default]
    Symbolic,
    /// Calls with their traced results.
    WithResults,
}

impl std::str::FromStr for RenderMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symbolic" => Ok(RenderMode::Symbolic),
            "with_results" => Ok(RenderMode::WithResults),
            other => Err(format!("unknown render mode `{other}`")),
        }
    }
}

fn parse_ref(inner: &str, position: usize) -> Result<Vec<usize>, ExplainError> {
    let malformed = |message: String| ExplainError::MalformedRef { position, message };
    let mut lines = Vec::new();
    for part in inner.split(SEP) {
        let part = part.trim();
        let digits = part
            .strip_prefix("###")
            .ok_or_else(|| malformed(format!("`{part}` is not a ###k reference")))?;
        let k: usize = digits
            .parse()
            .ok()
            .filter(|_| digits.bytes().all(|b| b.is_ascii_digit()))
            .ok_or_else(|| malformed(format!("`{part}` is not a line number")))?;
        if k == 0 {
            return Err(malformed("line numbers start at 1".into()));
        }
        if lines.last().is_some_and(|prev| *prev >= k) {
            return Err(malformed(format!("###{k} does not increase")));
        }
        lines.push(k);
    }
    Ok(lines)
}

pub fn parse_explanation(text: &str) -> Result<Explanation, ExplainError> {
    let mut segments = Vec::new();
    let mut rest = text;
    let mut offset = 0;
    while let Some(open) = rest.find(OPEN) {
        if open > 0 {
            segments.push(Segment::Text(rest[..open].to_string()));
        }
        let position = offset + open;
        let after = &rest[open + OPEN.len()..];
        let close = after.find(CLOSE).ok_or_else(|| ExplainError::MalformedRef {
            position,
            message: "unclosed `<<<`".into(),
        })?;
        segments.push(Segment::CallRef(parse_ref(&after[..close], position)?));
        let consumed = open + OPEN.len() + close + CLOSE.len();
        rest = &rest[consumed..];
        offset += consumed;
    }
    if !rest.is_empty() {
        segments.push(Segment::Text(rest.to_string()));
    }
    Ok(Explanation { segments })
}

fn wire_ref(lines: &[usize]) -> String {
    let refs: Vec<String> = lines.iter().map(|k| format!("###{k}")).collect();
    format!("{OPEN}{}{CLOSE}", refs.join(&format!(" {SEP} ")))
}

/// Writes the wire form.
pub fn serialize(expl: &Explanation) -> String {
    expl.segments
        .iter()
        .map(|s| match s {
            Segment::Text(t) => t.clone(),
            Segment::CallRef(lines) => wire_ref(lines),
        })
        .collect()
}

/// Checks references against a plan: every reference must name a step and
/// move forward through the document; unreferenced steps are warnings.
pub fn validate_refs(expl: &Explanation, plan: &Plan) -> Vec<Diagnostic> {
    let n = plan.steps.len();
    let mut diags = Vec::new();
    let mut previous = 0;
    let mut covered = BTreeSet::new();
    for seg in &expl.segments {
        let Segment::CallRef(lines) = seg else {
            continue;
        };
        for &k in lines {
            if k == 0 || k > n {
                diags.push(Diagnostic::error(
                    Some(k),
                    DiagnosticKind::OutOfRange { line: k, steps: n },
                ));
            } else if k <= previous {
                diags.push(Diagnostic::error(
                    Some(k),
                    DiagnosticKind::NonIncreasing { line: k, previous },
                ));
            } else {
                previous = k;
                covered.insert(k);
            }
        }
    }
    for k in 1..=n {
        if !covered.contains(&k) {
            diags.push(Diagnostic::warning(Some(k), DiagnosticKind::Uncovered { line: k }));
        }
    }
    diags
}

/// Human-readable surface: references become `[step k: tool(args)]`, with
/// `= result` appended in results mode, and a final `Answer:` line.
pub fn render(expl: &Explanation, plan: &Plan, outcome: &RunOutcome, mode: RenderMode) -> Result<String, ExplainError> {
    if mode == RenderMode::WithResults && !outcome.executable {
        return Err(ExplainError::TraceMissing);
    }
    let mut out = String::new();
    for seg in &expl.segments {
        match seg {
            Segment::Text(t) => out.push_str(t),
            Segment::CallRef(lines) => {
                let parts: Vec<String> = lines
                    .iter()
                    .map(|&k| {
                        let Some(step) = k.checked_sub(1).and_then(|i| plan.steps.get(i)) else {
                            return format!("[step {k}: ?]");
                        };
                        let call = step.to_string();
                        let call = call.split_once(" = ").map(|(_, c)| c).unwrap_or(&call);
                        match mode {
                            RenderMode::Symbolic => format!("[step {k}: {call}]"),
                            RenderMode::WithResults => {
                                let result = outcome
                                    .trace
                                    .iter()
                                    .find(|e| e.step == k)
                                    .map(|e| e.result.as_str())
                                    .unwrap_or("?");
                                format!("[step {k}: {call} = {result}]")
                            }
                        }
                    })
                    .collect();
                out.push_str(&parts.join(" "));
            }
        }
    }
    let mut text = out.trim_end().to_string();
    let _ = write!(text, "\nAnswer: {}", outcome.answer);
    Ok(text)
}
