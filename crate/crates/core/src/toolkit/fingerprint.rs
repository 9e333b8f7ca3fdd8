//! Structural fingerprints for generated Python tool definitions.
//!
//! Two definitions get the same fingerprint when their bodies are equal after
//! comment and docstring removal, whitespace normalization, and consistent
//! renaming of local identifiers (parameters first, then other names in order
//! of first appearance). Python keywords, builtins, and attribute names keep
//! their spelling, so `return a + b` and `return x + y` match while
//! `return a + b` and `return a - b` do not.

use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const KEEP: &[&str] = &[
    // keywords
    "and",
    "as",
    "assert",
    "break",
    "class",
    "continue",
    "def",
    "del",
    "elif",
    "else",
    "except",
    "False",
    "finally",
    "for",
    "from",
    "global",
    "if",
    "import",
    "in",
    "is",
    "lambda",
    "None",
    "nonlocal",
    "not",
    "or",
    "pass",
    "raise",
    "return",
    "True",
    "try",
    "while",
    "with",
    "yield",
    // builtins
    "abs",
    "all",
    "any",
    "bool",
    "dict",
    "enumerate",
    "filter",
    "float",
    "int",
    "isinstance",
    "len",
    "list",
    "map",
    "max",
    "min",
    "range",
    "reversed",
    "round",
    "set",
    "sorted",
    "str",
    "sum",
    "tuple",
    "zip",
    "print",
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ToolDef {
    pub name: String,
    pub source_text: String,
    pub param_count: usize,
    pub body_fingerprint: String,
}

static HEADER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\s*def\s+([A-Za-z_][A-Za-z0-9_]*)\s*\(([^)]*)\)\s*(?:->\s*[^:]+)?:\s*(.*)$").unwrap()
});

impl ToolDef {
    /// Parses `def name(params): body`. Returns `None` when the first line is
    /// not a function header.
    pub fn from_source(source: &str) -> Option<ToolDef> {
        let mut lines = source.lines().skip_while(|l| l.trim().is_empty());
        let header = lines.next()?;
        let caps = HEADER.captures(header)?;
        let name = caps[1].to_string();
        let params: Vec<String> = caps[2]
            .split(',')
            .map(|p| {
                p.split([':', '='])
                    .next()
                    .unwrap_or("")
                    .trim()
                    .trim_start_matches('*')
                    .to_string()
            })
            .filter(|p| !p.is_empty())
            .collect();
        let mut body: Vec<String> = Vec::new();
        if !caps[3].trim().is_empty() {
            body.push(format!("    {}", &caps[3]));
        }
        body.extend(lines.map(str::to_string));
        let body_fingerprint = fingerprint_body(&name, &params, &body.join("\n"));
        Some(ToolDef {
            name,
            source_text: source.trim_end().to_string(),
            param_count: params.len(),
            body_fingerprint,
        })
    }
}

/// Minimal Python tokenizer: identifiers, numbers, strings, operators.
fn tokenize_line(line: &str) -> Vec<String> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            break;
        } else if c == '"' || c == '\'' {
            let quote = c;
            let mut j = i + 1;
            while j < chars.len() && chars[j] != quote {
                if chars[j] == '\\' {
                    j += 1;
                }
                j += 1;
            }
            let end = (j + 1).min(chars.len());
            let lit: String = chars[i + 1..j.min(chars.len())].iter().collect();
            out.push(format!("\"{lit}\""));
            i = end;
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '.') {
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            if ["==", "!=", "<=", ">=", "**", "//", "+=", "-=", "*=", "/=", "->"].contains(&two.as_str()) {
                out.push(two);
                i += 2;
            } else {
                out.push(c.to_string());
                i += 1;
            }
        }
    }
    out
}

fn is_identifier(tok: &str) -> bool {
    tok.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
}

pub fn fingerprint_body(name: &str, params: &[String], body: &str) -> String {
    let mut renames: HashMap<String, String> = HashMap::new();
    renames.insert(name.to_string(), "self".to_string());
    for p in params {
        let next = format!("v{}", renames.len() - 1);
        renames.entry(p.clone()).or_insert(next);
    }
    let mut indents: Vec<usize> = Vec::new();
    let mut normalized = Vec::new();
    for line in body.lines() {
        let tokens = tokenize_line(line);
        if tokens.is_empty() {
            continue;
        }
        // bare string statements are docstrings
        if tokens.iter().all(|t| t.starts_with('"')) {
            continue;
        }
        let width = line.len() - line.trim_start().len();
        while indents.last().is_some_and(|w| *w > width) {
            indents.pop();
        }
        if indents.last() != Some(&width) {
            indents.push(width);
        }
        let mut out = Vec::with_capacity(tokens.len());
        for (k, tok) in tokens.iter().enumerate() {
            let after_dot = k > 0 && tokens[k - 1] == ".";
            if is_identifier(tok) && !after_dot && !KEEP.contains(&tok.as_str()) {
                let next = format!("v{}", renames.len() - 1);
                out.push(renames.entry(tok.clone()).or_insert(next).clone());
            } else {
                out.push(tok.clone());
            }
        }
        normalized.push(format!("{}|{}", indents.len(), out.join(" ")));
    }
    let digest = Sha256::digest(normalized.join("\n").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
