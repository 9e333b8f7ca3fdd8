//! Line lexer shared by the plan parser and the program linearizer.
//!
//! It understands the plan DSL's tokens and is lenient enough to tokenize
//! ordinary Python statements; anything it does not model becomes `Op`.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Numeric literal, kept as written.
    Number(String),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Assign,
    /// Any other operator or punctuation (`+`, `==`, `.`, `:` ...).
    Op(String),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) | Tok::Op(s) => f.write_str(s),
            Tok::Str(s) => f.write_str(&serde_json::to_string(s).unwrap()),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::LBracket => f.write_str("["),
            Tok::RBracket => f.write_str("]"),
            Tok::Comma => f.write_str(","),
            Tok::Assign => f.write_str("="),
        }
    }
}

fn ends_operand(prev: Option<&Tok>) -> bool {
    matches!(
        prev,
        Some(Tok::Ident(_) | Tok::Number(_) | Tok::Str(_) | Tok::RParen | Tok::RBracket)
    )
}

/// Tokenizes one line; `#` outside a string starts a comment.
/// Errors carry the 1-based column of the problem.
pub fn lex_line(line: &str) -> Result<Vec<Tok>, (usize, String)> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks: Vec<Tok> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '#' => break,
            '"' | '\'' => {
                let (s, next) = lex_string(&chars, i)?;
                toks.push(Tok::Str(s));
                i = next;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            '[' => {
                toks.push(Tok::LBracket);
                i += 1;
            }
            ']' => {
                toks.push(Tok::RBracket);
                i += 1;
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            c if c.is_ascii_digit()
                || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
                || (c == '-'
                    && !ends_operand(toks.last())
                    && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit() || *d == '.')) =>
            {
                let start = i;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                toks.push(Tok::Number(chars[start..i].iter().collect()));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            _ => {
                let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
                if ["==", "!=", "<=", ">=", "**", "//", "+=", "-=", "*=", "/=", "->"].contains(&two.as_str()) {
                    toks.push(Tok::Op(two));
                    i += 2;
                } else if c == '=' {
                    toks.push(Tok::Assign);
                    i += 1;
                } else {
                    toks.push(Tok::Op(c.to_string()));
                    i += 1;
                }
            }
        }
    }
    Ok(toks)
}

fn lex_string(chars: &[char], start: usize) -> Result<(String, usize), (usize, String)> {
    let quote = chars[start];
    let mut out = String::new();
    let mut i = start + 1;
    while i < chars.len() {
        match chars[i] {
            c if c == quote => return Ok((out, i + 1)),
            '\\' => {
                let esc = chars.get(i + 1).ok_or((i + 1, "dangling escape".to_string()))?;
                match esc {
                    'n' => out.push('\n'),
                    't' => out.push('\t'),
                    'r' => out.push('\r'),
                    'b' => out.push('\u{8}'),
                    'f' => out.push('\u{c}'),
                    '/' => out.push('/'),
                    '\\' | '"' | '\'' => out.push(*esc),
                    'u' => {
                        let hex: String = chars.get(i + 2..i + 6).unwrap_or(&[]).iter().collect();
                        let code = u32::from_str_radix(&hex, 16)
                            .ok()
                            .and_then(char::from_u32)
                            .ok_or((i + 1, format!("bad unicode escape `\\u{hex}`")))?;
                        out.push(code);
                        i += 4;
                    }
                    other => return Err((i + 1, format!("unknown escape `\\{other}`"))),
                }
                i += 2;
            }
            c => {
                out.push(c);
                i += 1;
            }
        }
    }
    Err((start + 1, "unterminated string".to_string()))
}
