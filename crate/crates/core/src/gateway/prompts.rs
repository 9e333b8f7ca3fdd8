//! Prompt templates for the formatter, tool maker, explainer, and baselines.
//!
//! Templates and few-shot examples are versioned files under `prompts/`,
//! embedded at compile time so a binary always carries the prompts it was
//! tested with.

use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::estimate_tokens;
use crate::harness::{Record, Task};
use crate::table::Table;

pub const TOOLMAKER_REQUIREMENTS: &str = include_str!("../../prompts/toolmaker_requirements.txt");
pub const TOOLMAKER_SCAFFOLD: &str = include_str!("../../prompts/toolmaker_scaffold.txt");
pub const EXPLAINER_REQUIREMENTS: &str = include_str!("../../prompts/explainer_requirements.txt");
pub const FORMATTER_REQUIREMENTS: &str = include_str!("../../prompts/formatter_requirements.txt");
const COT_TQA: &str = include_str!("../../prompts/cot_tqa.txt");
const COT_TFV: &str = include_str!("../../prompts/cot_tfv.txt");
const DIRECTQA_TQA: &str = include_str!("../../prompts/directqa_tqa.txt");
const DIRECTQA_TFV: &str = include_str!("../../prompts/directqa_tfv.txt");

/// Two in-context examples per task.
pub const DEFAULT_FEWSHOT_COUNT: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    Formatter,
    Toolmaker,
    Explainer,
    Cot,
    DirectQa,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub kind: PromptKind,
    pub system: String,
    pub fewshots: Vec<(String, String)>,
    pub user: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("serialized table needs ~{estimated} tokens, budget is {budget}")]
    PromptTooLong { estimated: usize, budget: usize },
    #[error("query is empty")]
    EmptyQuery,
}

#[derive(Deserialize)]
struct FewShotFile {
    examples: Vec<FewShot>,
}

#[derive(Deserialize)]
struct FewShot {
    input: String,
    output: String,
}

fn load_fewshots(raw: &str) -> Vec<(String, String)> {
    let file: FewShotFile = serde_json::from_str(raw).expect("embedded few-shot file is valid");
    file.examples
        .into_iter()
        .take(DEFAULT_FEWSHOT_COUNT)
        .map(|e| (e.input, e.output))
        .collect()
}

macro_rules! fewshots {
    ($name:ident, $path:literal) => {
        static $name: LazyLock<Vec<(String, String)>> = LazyLock::new(|| load_fewshots(include_str!($path)));
    };
}

fewshots!(FORMATTER_SHOTS, "../../prompts/fewshot/formatter.v1.json");
fewshots!(TOOLMAKER_SHOTS, "../../prompts/fewshot/toolmaker.v1.json");
fewshots!(EXPLAINER_SHOTS, "../../prompts/fewshot/explainer.v1.json");
fewshots!(COT_SHOTS, "../../prompts/fewshot/cot.v1.json");
fewshots!(DIRECTQA_SHOTS, "../../prompts/fewshot/directqa.v1.json");

fn check_budget(table: &Table, budget: usize) -> Result<String, PromptError> {
    let canonical = table.serialize_canonical();
    let estimated = estimate_tokens(&canonical);
    if estimated > budget {
        return Err(PromptError::PromptTooLong { estimated, budget });
    }
    Ok(canonical)
}

/// Human-readable table view: caption, then pipe-separated header and rows.
pub fn render_table_content(table: &Table) -> String {
    let mut out = String::new();
    if !table.caption().is_empty() {
        out.push_str(table.caption());
        out.push('\n');
    }
    out.push_str(&table.headers().join(" | "));
    for row in table.rows() {
        out.push('\n');
        out.push_str(&row.iter().map(|c| c.render_plain()).collect::<Vec<_>>().join(" | "));
    }
    out
}

/// Opens the quoted block with table, optional context, and query. Callers
/// may append lines before closing it with [`close_block`].
fn open_block(table: &Table, label: &str, query: &str, context: Option<&str>) -> String {
    let mut out = format!("'''\nTable: {}\n", render_table_content(table));
    if let Some(ctx) = context.filter(|c| !c.trim().is_empty()) {
        out.push_str(&format!("Context: {}\n", ctx.trim()));
    }
    out.push_str(&format!("{label}: {}\n", query.trim()));
    out
}

fn close_block(mut block: String) -> String {
    block.push_str("'''\n");
    block
}

fn header_block(table: &Table, label: &str, query: &str, context: Option<&str>) -> String {
    close_block(open_block(table, label, query, context))
}

pub fn build_formatter_prompt(table: &Table, query: &str, budget: usize) -> Result<PromptBundle, PromptError> {
    let canonical = check_budget(table, budget)?;
    let user = format!(
        "{}table_data = {canonical}\n\nFormatted table_data:",
        header_block(table, "Question", query, None)
    );
    Ok(PromptBundle {
        kind: PromptKind::Formatter,
        system: FORMATTER_REQUIREMENTS.to_string(),
        fewshots: FORMATTER_SHOTS.clone(),
        user,
    })
}

pub fn build_toolmaker_prompt(
    table: &Table,
    query: &str,
    context: Option<&str>,
    budget: usize,
) -> Result<PromptBundle, PromptError> {
    if query.trim().is_empty() {
        return Err(PromptError::EmptyQuery);
    }
    let canonical = check_budget(table, budget)?;
    let user = format!(
        "{}table_data = {canonical}\n",
        header_block(table, "Question", query, context)
    );
    Ok(PromptBundle {
        kind: PromptKind::Toolmaker,
        system: format!("{TOOLMAKER_REQUIREMENTS}\n{TOOLMAKER_SCAFFOLD}"),
        fewshots: TOOLMAKER_SHOTS.clone(),
        user,
    })
}

/// Appends ` ###k` to the k-th statement of the solution body.
///
/// Blank lines, comments, and `return` lines are not numbered. Helper
/// function definitions are kept above `solution`, unnumbered.
pub fn number_program(program: &str) -> String {
    let mut out = Vec::new();
    let mut in_solution = false;
    let mut k = 0;
    for line in program.lines() {
        let trimmed = line.trim();
        if !line.starts_with([' ', '\t']) && !trimmed.is_empty() {
            in_solution = trimmed.starts_with("def solution");
            if trimmed.starts_with("print(solution") {
                continue;
            }
            out.push(line.trim_end().to_string());
            continue;
        }
        let numbered =
            in_solution && !trimmed.is_empty() && !trimmed.starts_with('#') && !trimmed.starts_with("return");
        if numbered {
            k += 1;
            out.push(format!("{} ###{k}", line.trim_end()));
        } else {
            out.push(line.trim_end().to_string());
        }
    }
    while out.last().is_some_and(|l| l.is_empty()) {
        out.pop();
    }
    out.join("\n")
}

pub fn build_explainer_prompt(program: &str, record: &Record, budget: usize) -> Result<PromptBundle, PromptError> {
    let canonical = check_budget(&record.table, budget)?;
    let label = match record.task {
        Task::Tqa => "Question",
        Task::Tfv => "Statement",
    };
    let mut user = String::from("------\n");
    let mut block = open_block(&record.table, label, &record.query, None);
    block.push_str(&format!("Answer: {}\n", record.gold.trim()));
    user.push_str(&close_block(block));
    user.push_str(&format!(
        "Python Code:\ntable_data = {canonical}\n\n{}\n\nprint(solution(table_data))\n\nOutput Explanation:",
        number_program(program)
    ));
    Ok(PromptBundle {
        kind: PromptKind::Explainer,
        system: EXPLAINER_REQUIREMENTS.to_string(),
        fewshots: EXPLAINER_SHOTS.clone(),
        user,
    })
}

fn baseline_prompt(
    kind: PromptKind,
    table: &Table,
    query: &str,
    context: Option<&str>,
    task: Task,
    budget: usize,
) -> Result<PromptBundle, PromptError> {
    if query.trim().is_empty() {
        return Err(PromptError::EmptyQuery);
    }
    check_budget(table, budget)?;
    let (system, shots, label) = match (kind, task) {
        (PromptKind::Cot, Task::Tqa) => (COT_TQA, &*COT_SHOTS, "Question"),
        (PromptKind::Cot, Task::Tfv) => (COT_TFV, &*COT_SHOTS, "Statement"),
        (_, Task::Tqa) => (DIRECTQA_TQA, &*DIRECTQA_SHOTS, "Question"),
        (_, Task::Tfv) => (DIRECTQA_TFV, &*DIRECTQA_SHOTS, "Statement"),
    };
    Ok(PromptBundle {
        kind,
        system: system.to_string(),
        fewshots: shots.clone(),
        user: header_block(table, label, query, context),
    })
}

/// Chain-of-thought baseline and fallback prompt.
pub fn build_cot_prompt(
    table: &Table,
    query: &str,
    context: Option<&str>,
    task: Task,
    budget: usize,
) -> Result<PromptBundle, PromptError> {
    baseline_prompt(PromptKind::Cot, table, query, context, task, budget)
}

pub fn build_directqa_prompt(
    table: &Table,
    query: &str,
    context: Option<&str>,
    task: Task,
    budget: usize,
) -> Result<PromptBundle, PromptError> {
    baseline_prompt(PromptKind::DirectQa, table, query, context, task, budget)
}

/// Returns the contents of the first fenced code block, or the whole text.
pub fn strip_code_fence(text: &str) -> &str {
    let Some(start) = text.find("```") else {
        return text.trim();
    };
    let after = &text[start + 3..];
    let body_start = after.find('\n').map(|i| i + 1).unwrap_or(0);
    let body = &after[body_start..];
    match body.find("```") {
        Some(end) => body[..end].trim(),
        None => body.trim(),
    }
}
