//! Deterministic table formatter: cleaning, standardization, and header repair.
//!
//! The rule engine is the default formatter and also validates tables returned
//! by an LLM formatter. Where both have an opinion about a cell, rules win.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use chrono::NaiveDate;
use regex::Regex;
use serde::Serialize;

use crate::gateway::{prompts, Gateway, GatewayError, PromptError};
use crate::table::{CellValue, Table, TableFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CellCoord {
    pub row: usize,
    pub col: usize,
}

/// Audit trail of what the formatter rewrote.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FormatReport {
    pub cleaned_cells: usize,
    pub standardized_cells: usize,
    pub repaired_headers: Vec<(usize, String)>,
    pub stripped_symbols: BTreeMap<String, usize>,
    pub ambiguous_dates: Vec<CellCoord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub llm_response_rejected: Option<String>,
}

impl FormatReport {
    pub fn is_noop(&self) -> bool {
        self.cleaned_cells == 0 && self.standardized_cells == 0 && self.repaired_headers.is_empty()
    }

    fn strip(&mut self, symbol: &str) {
        *self.stripped_symbols.entry(symbol.to_string()).or_default() += 1;
    }

    fn merge(&mut self, other: FormatReport) {
        self.cleaned_cells += other.cleaned_cells;
        self.standardized_cells += other.standardized_cells;
        self.repaired_headers.extend(other.repaired_headers);
        for (sym, n) in other.stripped_symbols {
            *self.stripped_symbols.entry(sym).or_default() += n;
        }
        self.ambiguous_dates.extend(other.ambiguous_dates);
        if other.llm_response_rejected.is_some() {
            self.llm_response_rejected = other.llm_response_rejected;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatMode {
    #[default]
    Rules,
    Llm,
}

impl std::str::FromStr for FormatMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rules" => Ok(FormatMode::Rules),
            "llm" => Ok(FormatMode::Llm),
            other => Err(format!("unknown format mode `{other}`")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

static BRACKET_FOOTNOTE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[\d+\]").unwrap());
static SUPERSCRIPT_AFTER_NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(.*\d)([a-eᵃᵇᶜᵈᵉ])$").unwrap());

const TRAILING_MARKERS: &[char] = &['*', '†', '‡'];

/// Removes footnote markers, returning the remaining text and what was removed.
fn strip_footnotes(s: &str) -> (String, Vec<String>) {
    let mut removed = Vec::new();
    let mut text = s.trim().to_string();
    loop {
        let before = text.clone();
        for m in BRACKET_FOOTNOTE.find_iter(&before) {
            removed.push(m.as_str().to_string());
        }
        text = BRACKET_FOOTNOTE.replace_all(&text, "").trim().to_string();
        while let Some(c) = text.chars().last().filter(|c| TRAILING_MARKERS.contains(c)) {
            removed.push(c.to_string());
            text.pop();
            text = text.trim_end().to_string();
        }
        if let Some(caps) = SUPERSCRIPT_AFTER_NUMBER.captures(&text) {
            let prefix = caps[1].to_string();
            if CellValue::parse(&prefix).as_decimal().is_some() {
                removed.push(caps[2].to_string());
                text = prefix;
            }
        }
        if text == before {
            return (text, removed);
        }
    }
}

/// Strips currency symbols, footnote markers, and thousands separators.
pub fn clean_cells(table: &Table) -> (Table, FormatReport) {
    let mut report = FormatReport::default();
    let out = table.map_cells(|_, _, cell| {
        let cleaned = match cell {
            CellValue::Currency { amount, symbol } => {
                report.strip(symbol);
                CellValue::Number(*amount)
            }
            CellValue::Text(s) => {
                let (text, markers) = strip_footnotes(s);
                let reparsed = match CellValue::parse(&text) {
                    CellValue::Currency { amount, symbol } => {
                        report.strip(&symbol);
                        CellValue::Number(amount)
                    }
                    other => other,
                };
                if reparsed != *cell {
                    for m in &markers {
                        report.strip(m);
                    }
                }
                reparsed
            }
            other => other.clone(),
        };
        if cleaned != *cell {
            report.cleaned_cells += 1;
        }
        cleaned
    });
    (out, report)
}

static SLASH_DATE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(\d{1,2})/(\d{1,2})/(\d{4})$").unwrap());
static MONTH_FIRST: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([A-Za-z]+)\.?\s+(\d{1,2}),?\s+(\d{4})$").unwrap());
static DAY_FIRST: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(\d{1,2})\s+([A-Za-z]+)\.?,?\s+(\d{4})$").unwrap());
static PERCENT_TEXT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([+-]?\d[\d,]*(?:\.\d+)?|[+-]?\.\d+)\s*%$").unwrap());

fn month_number(name: &str) -> Option<u32> {
    const MONTHS: [&str; 12] = [
        "january",
        "february",
        "march",
        "april",
        "may",
        "june",
        "july",
        "august",
        "september",
        "october",
        "november",
        "december",
    ];
    let lower = name.to_ascii_lowercase();
    if lower == "sept" {
        return Some(9);
    }
    MONTHS
        .iter()
        .position(|m| *m == lower || (lower.len() == 3 && m.starts_with(&lower)))
        .map(|i| i as u32 + 1)
}

#[derive(Debug, PartialEq, Eq)]
enum DateReading {
    Date(NaiveDate),
    Ambiguous,
    NotADate,
}

fn read_date(s: &str) -> DateReading {
    if let Some(d) = crate::table::parse_iso_date(s) {
        return DateReading::Date(d);
    }
    if let Some(caps) = SLASH_DATE.captures(s) {
        let a: u32 = caps[1].parse().unwrap();
        let b: u32 = caps[2].parse().unwrap();
        let y: i32 = caps[3].parse().unwrap();
        let month_first = NaiveDate::from_ymd_opt(y, a, b);
        let day_first = NaiveDate::from_ymd_opt(y, b, a);
        return match (month_first, day_first) {
            (Some(x), Some(y)) if x == y => DateReading::Date(x),
            (Some(_), Some(_)) => DateReading::Ambiguous,
            (Some(x), None) | (None, Some(x)) => DateReading::Date(x),
            (None, None) => DateReading::NotADate,
        };
    }
    let named = MONTH_FIRST
        .captures(s)
        .map(|c| (c[1].to_string(), c[2].to_string(), c[3].to_string()))
        .or_else(|| {
            DAY_FIRST
                .captures(s)
                .map(|c| (c[2].to_string(), c[1].to_string(), c[3].to_string()))
        });
    if let Some((month, day, year)) = named {
        let date = month_number(&month).and_then(|m| NaiveDate::from_ymd_opt(year.parse().ok()?, m, day.parse().ok()?));
        if let Some(d) = date {
            return DateReading::Date(d);
        }
    }
    DateReading::NotADate
}

/// Rewrites dates to `Date` and "X%" strings to `Percent(X)`.
///
/// Slash dates whose month-first and day-first readings are both valid and
/// differ are left as text and reported as ambiguous.
pub fn standardize(table: &Table) -> (Table, FormatReport) {
    let mut report = FormatReport::default();
    let out = table.map_cells(|row, col, cell| {
        let CellValue::Text(s) = cell else {
            return cell.clone();
        };
        let s = s.trim();
        match read_date(s) {
            DateReading::Date(d) => {
                report.standardized_cells += 1;
                return CellValue::Date(d);
            }
            DateReading::Ambiguous => {
                report.ambiguous_dates.push(CellCoord { row, col });
                return cell.clone();
            }
            DateReading::NotADate => {}
        }
        if let Some(caps) = PERCENT_TEXT.captures(s) {
            if let Some(d) = crate::table::parse_decimal(&caps[1]) {
                report.standardized_cells += 1;
                return CellValue::Percent(d);
            }
        }
        cell.clone()
    });
    (out, report)
}

fn dominant_kind(table: &Table, col: usize) -> &'static str {
    let mut counts = [0usize; 3];
    for row in table.rows() {
        match &row[col] {
            CellValue::Date(_) => counts[0] += 1,
            CellValue::Number(_) | CellValue::Currency { .. } | CellValue::Percent(_) => counts[1] += 1,
            CellValue::Text(_) => counts[2] += 1,
            CellValue::Missing => {}
        }
    }
    let names = ["date", "amount", "text"];
    let best = counts.iter().copied().max().unwrap_or(0);
    if best == 0 {
        return "text";
    }
    names[counts.iter().position(|c| *c == best).unwrap()]
}

/// Infers names for empty headers and disambiguates duplicates.
///
/// Duplicate detection is case-insensitive because column lookup is.
pub fn repair(table: &Table) -> (Table, FormatReport) {
    let mut report = FormatReport::default();
    let mut headers: Vec<String> = table.headers().iter().map(|h| h.trim().to_string()).collect();
    for (j, h) in headers.iter_mut().enumerate() {
        if h.is_empty() {
            *h = format!("{}_{}", dominant_kind(table, j), j + 1);
            report.repaired_headers.push((j, h.clone()));
        }
    }
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let taken: Vec<String> = headers.iter().map(|h| h.to_lowercase()).collect();
    let mut assigned: Vec<String> = Vec::new();
    for (j, h) in headers.iter_mut().enumerate() {
        let key = h.to_lowercase();
        let n = seen.entry(key.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            let mut suffix = *n;
            let mut candidate = format!("{h}_{suffix}");
            while taken.contains(&candidate.to_lowercase()) || assigned.contains(&candidate.to_lowercase()) {
                suffix += 1;
                candidate = format!("{h}_{suffix}");
            }
            *n = suffix;
            assigned.push(candidate.to_lowercase());
            *h = candidate;
            report.repaired_headers.push((j, h.clone()));
        }
    }
    if headers.iter().zip(table.headers()).all(|(a, b)| a == b) {
        return (table.clone(), report);
    }
    (table.with_headers(headers), report)
}

/// Rule-mode formatting: clean, then standardize, then repair.
pub fn format_rules(table: &Table) -> (Table, FormatReport) {
    let (t, mut report) = clean_cells(table);
    let (t, r) = standardize(&t);
    report.merge(r);
    let (t, r) = repair(&t);
    report.merge(r);
    (t, report)
}

/// Formats `table` for `query`.
///
/// Rules mode ignores the query. LLM mode sends the table and query to the
/// gateway, parses the returned array literal, and re-applies the rules; a
/// response that cannot be parsed or changes the table shape is discarded in
/// favor of the rule-mode result.
pub fn format_table(
    table: &Table,
    query: &str,
    mode: FormatMode,
    gateway: Option<(&dyn Gateway, usize)>,
) -> Result<(Table, FormatReport), FormatError> {
    match (mode, gateway) {
        (FormatMode::Rules, _) | (FormatMode::Llm, None) => Ok(format_rules(table)),
        (FormatMode::Llm, Some((gw, budget))) => {
            let bundle = prompts::build_formatter_prompt(table, query, budget)?;
            let response = gw.complete(&bundle)?;
            Ok(merge_llm_table(table, &response))
        }
    }
}

fn merge_llm_table(raw: &Table, response: &str) -> (Table, FormatReport) {
    let (by_rules, mut report) = format_rules(raw);
    let body = prompts::strip_code_fence(response);
    let parsed = match crate::table::parse_table(body, TableFormat::JsonRows) {
        Ok(t) => t,
        Err(e) => {
            report.llm_response_rejected = Some(e.to_string());
            return (by_rules, report);
        }
    };
    if parsed.n_rows() != raw.n_rows() || parsed.n_cols() != raw.n_cols() {
        report.llm_response_rejected = Some(format!(
            "shape {}x{} differs from input {}x{}",
            parsed.n_rows(),
            parsed.n_cols(),
            raw.n_rows(),
            raw.n_cols()
        ));
        return (by_rules, report);
    }
    let (llm_formatted, _) = format_rules(&parsed);
    let merged = by_rules.map_cells(|i, j, rule_cell| match rule_cell {
        CellValue::Text(_) | CellValue::Missing => llm_formatted.rows()[i][j].clone(),
        typed => typed.clone(),
    });
    let headers: Vec<String> = raw
        .headers()
        .iter()
        .zip(llm_formatted.headers())
        .map(|(r, l)| if r.trim().is_empty() { l.clone() } else { r.clone() })
        .collect();
    let (merged, r) = repair(&merged.with_headers(headers));
    report.repaired_headers.extend(r.repaired_headers);
    (merged, report)
}

/// Applies the cleaning rules to a single string and returns its numeric
/// magnitude, so "$5", "1,234*", and "45%" all yield numbers.
pub fn clean_number(s: &str) -> Option<rust_decimal::Decimal> {
    let (text, _) = strip_footnotes(s);
    CellValue::parse(&text).as_decimal()
}
