//! Single-assignment plan language.
//!
//! ```text
//! snow = get_column_by_name(table_data, "Snowfall")
//! top = max(snow)
//! ANSWER = top
//! ```
//!
//! Each step binds a fresh variable to one tool call whose arguments are
//! literals or earlier variables. `table_data` is bound to the input table.
//! The last line assigns `ANSWER`.

mod lex;
mod linearize;
mod validate;

use std::collections::HashSet;
use std::fmt;

use rust_decimal::Decimal;
use serde::Serialize;
use thiserror::Error;

use crate::table::{fmt_decimal, parse_decimal};

pub use lex::{lex_line, Tok};
pub use linearize::{linearize_program, LinearizeError};
pub use validate::{validate_plan, STEP_BUDGET};

pub const TABLE_VAR: &str = "table_data";
pub const ANSWER_VAR: &str = "ANSWER";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Literal {
    Number(Decimal),
    Str(String),
    Bool(bool),
    Array(Vec<Literal>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgExpr {
    Lit(Literal),
    VarRef(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    /// 1-based line number within the plan.
    pub index: usize,
    pub var: String,
    pub tool: String,
    pub args: Vec<ArgExpr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Plan {
    pub steps: Vec<Step>,
    pub answer: ArgExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("plan has no ANSWER line")]
    MissingAnswer,
}

impl Plan {
    /// Builds a plan from `(var, tool, args)` triples, numbering steps from 1.
    pub fn from_parts(steps: Vec<(String, String, Vec<ArgExpr>)>, answer: ArgExpr) -> Plan {
        Plan {
            steps: steps
                .into_iter()
                .enumerate()
                .map(|(i, (var, tool, args))| Step {
                    index: i + 1,
                    var,
                    tool,
                    args,
                })
                .collect(),
            answer,
        }
    }

    pub fn map_tools(mut self, mut f: impl FnMut(&str) -> String) -> Plan {
        for step in &mut self.steps {
            step.tool = f(&step.tool);
        }
        self
    }

    pub fn tools(&self) -> impl Iterator<Item = &str> {
        self.steps.iter().map(|s| s.tool.as_str())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(d) => f.write_str(&fmt_decimal(*d)),
            Literal::Str(s) => f.write_str(&serde_json::to_string(s).unwrap()),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Array(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl fmt::Display for ArgExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgExpr::Lit(l) => write!(f, "{l}"),
            ArgExpr::VarRef(v) => f.write_str(v),
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}(", self.var, self.tool)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// Canonical text of a plan: one statement per line, no trailing newline.
pub fn render_plan(plan: &Plan) -> String {
    let mut lines: Vec<String> = plan.steps.iter().map(Step::to_string).collect();
    lines.push(format!("{ANSWER_VAR} = {}", plan.answer));
    lines.join("\n")
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_plan(self))
    }
}

fn python_literal(lit: &Literal) -> String {
    match lit {
        Literal::Bool(true) => "True".into(),
        Literal::Bool(false) => "False".into(),
        Literal::Array(items) => format!("[{}]", items.iter().map(python_literal).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

fn python_expr(expr: &ArgExpr) -> String {
    match expr {
        ArgExpr::Lit(l) => python_literal(l),
        ArgExpr::VarRef(v) => v.clone(),
    }
}

/// Writes a plan as a straight-line Python `solution` function, the shape
/// [`linearize_program`] reads back.
pub fn plan_to_python(plan: &Plan) -> String {
    let mut out = String::from("def solution(table_data):\n");
    for step in &plan.steps {
        let args: Vec<String> = step.args.iter().map(python_expr).collect();
        out.push_str(&format!("    {} = {}({})\n", step.var, step.tool, args.join(", ")));
    }
    out.push_str(&format!("    return {}", python_expr(&plan.answer)));
    out
}

/// Re-spaces plan text token by token, dropping comments and blank lines.
/// Literals are re-spelled the way [`render_plan`] writes them.
pub fn normalize_ws(text: &str) -> String {
    let mut out = Vec::new();
    for line in text.lines() {
        let Ok(toks) = lex_line(line) else {
            out.push(line.trim().to_string());
            continue;
        };
        if toks.is_empty() {
            continue;
        }
        let mut s = String::new();
        for (i, tok) in toks.iter().enumerate() {
            let prev = i.checked_sub(1).map(|p| &toks[p]);
            let glue = !matches!(
                (prev, tok),
                (None, _)
                    | (Some(Tok::LParen | Tok::LBracket), _)
                    | (_, Tok::RParen | Tok::RBracket | Tok::Comma)
                    | (Some(Tok::Ident(_)), Tok::LParen)
            );
            if glue {
                s.push(' ');
            }
            match tok {
                Tok::Number(n) => match parse_decimal(n) {
                    Some(d) => s.push_str(&fmt_decimal(d)),
                    None => s.push_str(n),
                },
                other => s.push_str(&other.to_string()),
            }
        }
        out.push(s);
    }
    out.join("\n")
}

struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> PlanError {
        PlanError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: &Tok) -> Result<(), PlanError> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(self.err(format!("expected `{want}`, found `{t}`"))),
            None => Err(self.err(format!("expected `{want}` at end of line"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

fn parse_number(text: &str) -> Option<Decimal> {
    parse_decimal(text)
}

/// Parses a literal or variable. `python` accepts `True`/`False` spellings.
pub(crate) fn parse_expr_tokens(toks: &[Tok], pos: &mut usize, python: bool) -> Result<ArgExpr, String> {
    let tok = toks.get(*pos).ok_or("expected an expression")?;
    *pos += 1;
    match tok {
        Tok::Number(n) => parse_number(n)
            .map(|d| ArgExpr::Lit(Literal::Number(d)))
            .ok_or_else(|| format!("malformed number `{n}`")),
        Tok::Str(s) => Ok(ArgExpr::Lit(Literal::Str(s.clone()))),
        Tok::Ident(id) => match (id.as_str(), python) {
            ("true", false) | ("True", true) => Ok(ArgExpr::Lit(Literal::Bool(true))),
            ("false", false) | ("False", true) => Ok(ArgExpr::Lit(Literal::Bool(false))),
            _ => Ok(ArgExpr::VarRef(id.clone())),
        },
        Tok::LBracket => {
            let mut items = Vec::new();
            if toks.get(*pos) == Some(&Tok::RBracket) {
                *pos += 1;
                return Ok(ArgExpr::Lit(Literal::Array(items)));
            }
            loop {
                match parse_expr_tokens(toks, pos, python)? {
                    ArgExpr::Lit(l) => items.push(l),
                    ArgExpr::VarRef(v) => return Err(format!("array items must be literals, found `{v}`")),
                }
                match toks.get(*pos) {
                    Some(Tok::Comma) => {
                        *pos += 1;
                        // trailing comma
                        if toks.get(*pos) == Some(&Tok::RBracket) {
                            *pos += 1;
                            break;
                        }
                    }
                    Some(Tok::RBracket) => {
                        *pos += 1;
                        break;
                    }
                    Some(t) => return Err(format!("expected `,` or `]`, found `{t}`")),
                    None => return Err("unterminated array".into()),
                }
            }
            let same_kind = items
                .windows(2)
                .all(|w| std::mem::discriminant(&w[0]) == std::mem::discriminant(&w[1]));
            if !same_kind {
                return Err("array items must share one type".into());
            }
            Ok(ArgExpr::Lit(Literal::Array(items)))
        }
        other => Err(format!("unexpected `{other}`")),
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_operand(cur: &mut Cursor<'_>) -> Result<ArgExpr, PlanError> {
    let mut pos = cur.pos;
    let expr = parse_expr_tokens(cur.toks, &mut pos, false).map_err(|m| cur.err(m))?;
    cur.pos = pos;
    if let ArgExpr::VarRef(v) = &expr {
        if !is_identifier(v) {
            return Err(cur.err(format!("`{v}` is not a valid identifier")));
        }
    }
    Ok(expr)
}

/// Parses plan text. Blank lines and `#` comments are ignored.
pub fn parse_plan(text: &str) -> Result<Plan, PlanError> {
    let mut steps: Vec<(String, String, Vec<ArgExpr>)> = Vec::new();
    let mut bound: HashSet<String> = HashSet::new();
    let mut answer: Option<ArgExpr> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = lex_line(raw).map_err(|(col, message)| PlanError::Syntax {
            line,
            message: format!("column {col}: {message}"),
        })?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            toks: &toks,
            pos: 0,
            line,
        };
        if answer.is_some() {
            return Err(cur.err("statement after ANSWER"));
        }
        let var = match cur.next() {
            Some(Tok::Ident(v)) if is_identifier(v) => v.clone(),
            Some(t) => return Err(cur.err(format!("expected a variable, found `{t}`"))),
            None => unreachable!(),
        };
        cur.expect(&Tok::Assign)?;

        if var == ANSWER_VAR {
            let expr = parse_operand(&mut cur)?;
            if !cur.at_end() {
                return Err(cur.err("ANSWER takes a single variable or literal"));
            }
            answer = Some(expr);
            continue;
        }
        if var == TABLE_VAR || var == "true" || var == "false" {
            return Err(cur.err(format!("`{var}` is reserved")));
        }
        if !bound.insert(var.clone()) {
            return Err(cur.err(format!("`{var}` is assigned more than once")));
        }

        let tool = match cur.next() {
            Some(Tok::Ident(t)) if is_identifier(t) => t.clone(),
            Some(t) => return Err(cur.err(format!("expected a tool name, found `{t}`"))),
            None => return Err(cur.err("expected a tool call")),
        };
        cur.expect(&Tok::LParen)?;
        let mut args = Vec::new();
        if cur.peek() == Some(&Tok::RParen) {
            cur.next();
        } else {
            loop {
                args.push(parse_operand(&mut cur)?);
                match cur.next() {
                    Some(Tok::Comma) => {}
                    Some(Tok::RParen) => break,
                    Some(Tok::LParen) => return Err(cur.err("nested calls are not allowed")),
                    Some(t) => return Err(cur.err(format!("expected `,` or `)`, found `{t}`"))),
                    None => return Err(cur.err("unclosed argument list")),
                }
            }
        }
        if !cur.at_end() {
            return Err(cur.err(format!("unexpected `{}` after call", cur.peek().unwrap())));
        }
        steps.push((var, tool, args));
    }

    let answer = answer.ok_or(PlanError::MissingAnswer)?;
    Ok(Plan::from_parts(steps, answer))
}
