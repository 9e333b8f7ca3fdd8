//! Parsing of model responses.

use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::toolkit::ToolDef;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no `def solution(...)` found in tool maker output")]
pub struct NoSolutionFound;

static DEF_LINE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^def\s+([A-Za-z_][A-Za-z0-9_]*)\s*\(").unwrap());

/// Concatenates fenced code blocks, or returns the text unchanged if it has none.
fn code_of(text: &str) -> String {
    if !text.contains("```") {
        return text.to_string();
    }
    let mut out = String::new();
    let mut inside = false;
    for line in text.lines() {
        if line.trim_start().starts_with("```") {
            inside = !inside;
            continue;
        }
        if inside {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

/// Splits tool maker output into helper tool definitions and the program.
///
/// Every top-level `def` other than `solution` becomes a [`ToolDef`]; the
/// `solution` function's source is returned as the program text.
pub fn parse_toolmaker_output(text: &str) -> Result<(Vec<ToolDef>, String), NoSolutionFound> {
    let code = code_of(text);
    let lines: Vec<&str> = code.lines().collect();
    let mut defs = Vec::new();
    let mut program = None;
    let mut i = 0;
    while i < lines.len() {
        let Some(caps) = DEF_LINE.captures(lines[i]) else {
            i += 1;
            continue;
        };
        let name = caps[1].to_string();
        let start = i;
        i += 1;
        while i < lines.len() {
            let l = lines[i];
            if !l.trim().is_empty() && !l.starts_with([' ', '\t']) {
                break;
            }
            i += 1;
        }
        let mut end = i;
        while end > start + 1 && lines[end - 1].trim().is_empty() {
            end -= 1;
        }
        let source = lines[start..end].join("\n");
        if name == "solution" {
            program = Some(source);
        } else if let Some(def) = ToolDef::from_source(&source) {
            defs.push(def);
        }
    }
    program.map(|p| (defs, p)).ok_or(NoSolutionFound)
}

static ANSWER_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\W*(?:final\s+)?answer\s*(?:is)?\s*[:：]\s*(.+)$").unwrap());
static ANSWER_INLINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)[.!?)]\s+(?:final\s+)?answer\s*[:：]\s*([^:：]+)$").unwrap());
static ANSWER_IS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)the (?:final )?answer is\s*:?\s*(.+)$").unwrap());

/// Pulls the final answer out of a chain-of-thought or direct response.
///
/// Looks for the last `Answer: ...` line, then an `Answer: ...` ending a
/// sentence, then the last "the answer is ...", then falls back to the last
/// non-empty line.
pub fn extract_final_answer(text: &str) -> String {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let found = lines
        .iter()
        .rev()
        .find_map(|l| ANSWER_LINE.captures(l).map(|c| c[1].to_string()))
        .or_else(|| {
            lines
                .iter()
                .rev()
                .find_map(|l| ANSWER_INLINE.captures(l).map(|c| c[1].to_string()))
        })
        .or_else(|| {
            lines
                .iter()
                .rev()
                .find_map(|l| ANSWER_IS.captures(l).map(|c| c[1].to_string()))
        })
        .or_else(|| lines.last().map(|l| l.to_string()))
        .unwrap_or_default();
    tidy_answer(&found)
}

fn tidy_answer(s: &str) -> String {
    let s = s.trim().trim_matches('*').trim();
    let s = s.strip_suffix('.').unwrap_or(s).trim();
    let s = s.strip_prefix('"').and_then(|x| x.strip_suffix('"')).unwrap_or(s);
    s.trim().to_string()
}
