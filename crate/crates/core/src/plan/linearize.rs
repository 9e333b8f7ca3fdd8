//! Translation of generated Python solution code into a plan.
//!
//! Only straight-line code is accepted: each statement must be
//! `name = tool(arg, ...)` with literal or variable arguments, optionally
//! followed by `print(...)`, ending in `return name_or_literal`.

use std::collections::HashSet;

use thiserror::Error;

use super::lex::{lex_line, Tok};
use super::{parse_expr_tokens, ArgExpr, Literal, Plan, TABLE_VAR};
use crate::toolkit::normalize_name;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinearizeError {
    #[error("program is not linearizable: {reason}")]
    NonLinearizable { reason: String },
}

fn reject<T>(reason: impl Into<String>) -> Result<T, LinearizeError> {
    Err(LinearizeError::NonLinearizable { reason: reason.into() })
}

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start().len()
}

/// Lines of the `solution` body, or the whole source when there is no such def.
/// Other top-level definitions are skipped.
fn solution_body(source: &str) -> Vec<&str> {
    let lines: Vec<&str> = source.lines().collect();
    let start = lines.iter().position(|l| {
        let t = l.trim_start();
        t.starts_with("def solution(") || t.starts_with("def solution (")
    });
    let Some(start) = start else {
        return lines;
    };
    let def_indent = indent_of(lines[start]);
    lines[start + 1..]
        .iter()
        .take_while(|l| l.trim().is_empty() || indent_of(l) > def_indent)
        .copied()
        .collect()
}

fn bracket_depth(toks: &[Tok]) -> i64 {
    toks.iter()
        .map(|t| match t {
            Tok::LParen | Tok::LBracket => 1,
            Tok::RParen | Tok::RBracket => -1,
            Tok::Op(o) if o == "{" => 1,
            Tok::Op(o) if o == "}" => -1,
            _ => 0,
        })
        .sum()
}

/// Joins physical lines into logical statements (bracket continuation).
fn logical_lines(body: &[&str]) -> Result<Vec<(usize, Vec<Tok>)>, LinearizeError> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, Vec<Tok>)> = None;
    for line in body {
        let toks = match lex_line(line) {
            Ok(t) => t,
            Err((_, msg)) => return reject(format!("unreadable line: {msg}")),
        };
        if let Some((indent, mut acc)) = pending.take() {
            acc.extend(toks);
            if bracket_depth(&acc) > 0 {
                pending = Some((indent, acc));
            } else {
                out.push((indent, acc));
            }
            continue;
        }
        if toks.is_empty() {
            continue;
        }
        // docstrings and other bare strings
        if toks.iter().all(|t| matches!(t, Tok::Str(_))) {
            continue;
        }
        let indent = indent_of(line);
        if bracket_depth(&toks) > 0 {
            pending = Some((indent, toks));
        } else {
            out.push((indent, toks));
        }
    }
    if pending.is_some() {
        return reject("unbalanced brackets");
    }
    Ok(out)
}

fn python_literal_expr(toks: &[Tok], what: &str) -> Result<ArgExpr, LinearizeError> {
    if let Some(Tok::Ident(id)) = toks.first() {
        if id == "None" {
            return reject("None literal");
        }
    }
    let mut pos = 0;
    let expr = match parse_expr_tokens(toks, &mut pos, true) {
        Ok(e) => e,
        Err(_) => return reject(classify(toks, what)),
    };
    if pos != toks.len() {
        return reject(classify(toks, what));
    }
    Ok(expr)
}

/// Names the construct that makes an expression unacceptable.
fn classify(toks: &[Tok], what: &str) -> String {
    if toks.iter().any(|t| matches!(t, Tok::Ident(k) if k == "for")) {
        return "loop".into();
    }
    if toks.iter().any(|t| matches!(t, Tok::Ident(k) if k == "if")) {
        return "conditional".into();
    }
    if toks.iter().any(|t| matches!(t, Tok::Ident(k) if k == "lambda")) {
        return "nested definition".into();
    }
    if toks
        .iter()
        .any(|t| matches!(t, Tok::Op(o) if o != "." && o != "{" && o != "}"))
    {
        return format!("expression in {what}");
    }
    for w in toks.windows(2) {
        match (&w[0], &w[1]) {
            (Tok::Ident(_), Tok::LParen) | (Tok::RParen, Tok::LParen) => return format!("nested call in {what}"),
            (Tok::Ident(_) | Tok::RParen | Tok::RBracket | Tok::Str(_), Tok::LBracket) => {
                return format!("subscript in {what}")
            }
            (_, Tok::Op(o)) if o == "." => return format!("attribute access in {what}"),
            _ => {}
        }
    }
    format!("unsupported {what}")
}

fn split_args(toks: &[Tok]) -> Vec<&[Tok]> {
    let mut out = Vec::new();
    if toks.is_empty() {
        return out;
    }
    let mut depth = 0i64;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        match t {
            Tok::LParen | Tok::LBracket => depth += 1,
            Tok::RParen | Tok::RBracket => depth -= 1,
            Tok::Comma if depth == 0 => {
                out.push(&toks[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    // trailing comma leaves an empty final slice
    if start < toks.len() {
        out.push(&toks[start..]);
    }
    out
}

fn is_cell_getter(tool: &str) -> bool {
    matches!(normalize_name(tool).as_str(), "get_column_cell_value" | "get_cell")
}

fn keyword_reason(word: &str) -> Option<&'static str> {
    Some(match word {
        "for" | "while" => "loop",
        "if" | "elif" | "else" | "try" | "except" | "finally" | "with" | "match" | "assert" => "conditional",
        "def" | "class" | "lambda" => "nested definition",
        "global" | "nonlocal" | "del" | "yield" | "raise" | "break" | "continue" => "unsupported statement",
        _ => return None,
    })
}

/// Converts generated solution code into a plan.
pub fn linearize_program(source: &str) -> Result<Plan, LinearizeError> {
    let body = solution_body(source);
    let stmts = logical_lines(&body)?;
    let Some(base) = stmts.first().map(|(i, _)| *i) else {
        return reject("empty program");
    };

    let mut bound: HashSet<String> = HashSet::from([TABLE_VAR.to_string()]);
    let mut steps: Vec<(String, String, Vec<ArgExpr>)> = Vec::new();
    let mut answer: Option<ArgExpr> = None;

    for (indent, toks) in &stmts {
        if let Some(Tok::Ident(first)) = toks.first() {
            if let Some(reason) = keyword_reason(first) {
                return reject(reason);
            }
        }
        if *indent != base {
            return reject("nested block");
        }
        if answer.is_some() {
            return reject("statement after return");
        }
        match toks.as_slice() {
            [Tok::Ident(kw), ..] if kw == "import" || kw == "from" => continue,
            [Tok::Ident(kw)] if kw == "pass" => continue,
            [Tok::Ident(p), Tok::LParen, ..] if p == "print" => continue,
            [Tok::Ident(kw), rest @ ..] if kw == "return" => {
                if rest.is_empty() {
                    return reject("empty return");
                }
                answer = Some(python_literal_expr(rest, "return")?);
                continue;
            }
            _ => {}
        }

        let Some(eq) = toks.iter().position(|t| *t == Tok::Assign) else {
            if toks
                .iter()
                .any(|t| matches!(t, Tok::Op(o) if o.len() == 2 && o.ends_with('=')))
            {
                return reject("reassignment");
            }
            return reject("bare expression");
        };
        let (lhs, rhs) = (&toks[..eq], &toks[eq + 1..]);
        let var = match lhs {
            [Tok::Ident(v)] => v.clone(),
            [Tok::Ident(_), Tok::Comma, ..] => return reject("multiple assignment"),
            _ if lhs.contains(&Tok::LBracket) => return reject("subscript assignment"),
            _ => return reject("unsupported assignment target"),
        };
        if bound.contains(&var) {
            return reject("reassignment");
        }
        if rhs.contains(&Tok::Assign) {
            return reject("chained assignment");
        }

        let (tool, inner) = match rhs {
            [Tok::Ident(tool), Tok::LParen, inner @ .., Tok::RParen]
                if bracket_depth(inner) == 0 && balanced_prefixes(inner) =>
            {
                (tool.clone(), inner)
            }
            _ => {
                return match python_literal_expr(rhs, "assignment") {
                    Ok(_) => reject("bare assignment"),
                    Err(e) => Err(e),
                }
            }
        };
        let mut args = Vec::new();
        for arg in split_args(inner) {
            if arg.is_empty() {
                return reject("empty argument");
            }
            if matches!(arg, [Tok::Ident(_), Tok::Assign, ..]) {
                return reject("keyword argument");
            }
            args.push(python_literal_expr(arg, "argument")?);
        }
        if is_cell_getter(&tool)
            && args.len() == 2
            && matches!(args[0], ArgExpr::Lit(Literal::Number(_)))
            && matches!(args[1], ArgExpr::VarRef(_))
        {
            args.swap(0, 1);
        }
        bound.insert(var.clone());
        steps.push((var, tool, args));
    }

    match answer {
        Some(a) => Ok(Plan::from_parts(steps, a)),
        None => reject("missing return"),
    }
}

/// True when no prefix of `toks` closes more brackets than it opens, so the
/// outer parentheses of `f(...)` really enclose the whole argument list.
fn balanced_prefixes(toks: &[Tok]) -> bool {
    let mut depth = 0i64;
    for t in toks {
        match t {
            Tok::LParen | Tok::LBracket => depth += 1,
            Tok::RParen | Tok::RBracket => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return false;
        }
    }
    true
}
