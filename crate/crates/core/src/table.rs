//! Typed tables, cell-value parsing, and the canonical nested-array serialization.
//!
//! Every other module consumes tables through this representation. Cells are
//! parsed greedily into the most specific [`CellValue`] variant, and
//! [`Table::serialize_canonical`] produces the array literal that prompts and
//! executors see.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use chrono::NaiveDate;
use regex::Regex;
use rust_decimal::Decimal;
use thiserror::Error;

/// ISO 4217 codes accepted as a currency suffix ("12.50 USD").
pub const CURRENCY_CODES: &[&str] = &[
    "USD", "EUR", "GBP", "JPY", "CNY", "RMB", "CHF", "CAD", "AUD", "NZD", "HKD", "SGD", "INR", "KRW", "RUB", "BRL",
    "MXN", "SEK", "NOK", "DKK", "ZAR", "TWD", "PLN", "TRY",
];

/// Symbols accepted as a currency prefix.
pub const CURRENCY_SYMBOLS: &[char] = &['$', '€', '£', '¥'];

const NUM: &str = r"(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?|\.\d+";

static NUMBER_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!(r"^[+-]?(?:{NUM})$")).unwrap());
static PERCENT_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!(r"^([+-]?(?:{NUM}))\s*%$")).unwrap());
static CURRENCY_PREFIX_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^([+-]?)([$€£¥])\s*([+-]?)((?:{NUM}))$")).unwrap());
static CURRENCY_SUFFIX_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^([+-]?(?:{NUM}))\s*([A-Z]{{3}})$")).unwrap());
static ISO_DATE_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(\d{4})-(\d{2})-(\d{2})$").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CellValue {
    Number(Decimal),
    Text(String),
    Date(NaiveDate),
    Currency {
        amount: Decimal,
        symbol: String,
    },
    /// Displayed magnitude: "45%" is stored as 45.
    Percent(Decimal),
    Missing,
}

impl CellValue {
    /// Parses one raw cell string into the most specific variant.
    ///
    /// Precedence is Date > Currency > Percent > Number > Text. Empty or
    /// whitespace-only input is `Missing`. Only ISO dates are recognized here;
    /// other date layouts are left as text for the formatter to standardize.
    pub fn parse(raw: &str) -> CellValue {
        let s = raw.trim();
        if s.is_empty() {
            return CellValue::Missing;
        }
        if let Some(date) = parse_iso_date(s) {
            return CellValue::Date(date);
        }
        if let Some((amount, symbol)) = parse_currency(s) {
            return CellValue::Currency { amount, symbol };
        }
        if let Some(caps) = PERCENT_RE.captures(s) {
            if let Some(d) = parse_decimal(&caps[1]) {
                return CellValue::Percent(d);
            }
        }
        if NUMBER_RE.is_match(s) {
            if let Some(d) = parse_decimal(s) {
                return CellValue::Number(d);
            }
        }
        CellValue::Text(s.to_string())
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, CellValue::Missing)
    }

    /// Numeric magnitude for Number, Currency, and Percent cells.
    pub fn as_decimal(&self) -> Option<Decimal> {
        match self {
            CellValue::Number(d) | CellValue::Percent(d) => Some(*d),
            CellValue::Currency { amount, .. } => Some(*amount),
            _ => None,
        }
    }

    /// Plain rendering used for answers and string comparison.
    pub fn render_plain(&self) -> String {
        match self {
            CellValue::Number(d) | CellValue::Percent(d) => fmt_decimal(*d),
            CellValue::Currency { amount, .. } => fmt_decimal(*amount),
            CellValue::Text(s) => s.clone(),
            CellValue::Date(d) => d.format("%Y-%m-%d").to_string(),
            CellValue::Missing => String::new(),
        }
    }

    /// Literal form inside the canonical array serialization.
    pub fn to_literal(&self) -> String {
        match self {
            CellValue::Number(d) | CellValue::Percent(d) => fmt_decimal(*d),
            CellValue::Currency { amount, .. } => fmt_decimal(*amount),
            CellValue::Text(s) => quote(s),
            CellValue::Date(d) => quote(&d.format("%Y-%m-%d").to_string()),
            CellValue::Missing => quote(""),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            CellValue::Number(_) => "number",
            CellValue::Text(_) => "text",
            CellValue::Date(_) => "date",
            CellValue::Currency { .. } => "currency",
            CellValue::Percent(_) => "percent",
            CellValue::Missing => "missing",
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_plain())
    }
}

/// Renders a decimal without trailing zeros ("1.50" -> "1.5", "-0" -> "0").
pub fn fmt_decimal(d: Decimal) -> String {
    if d.is_zero() {
        return "0".to_string();
    }
    d.normalize().to_string()
}

/// Parses a decimal, tolerating thousands separators and scientific notation.
pub fn parse_decimal(s: &str) -> Option<Decimal> {
    let cleaned: String = s.trim().chars().filter(|c| *c != ',').collect();
    let cleaned = cleaned.strip_prefix('+').unwrap_or(&cleaned);
    if cleaned.is_empty() {
        return None;
    }
    Decimal::from_str(cleaned)
        .or_else(|_| Decimal::from_scientific(cleaned))
        .ok()
}

pub fn parse_iso_date(s: &str) -> Option<NaiveDate> {
    let caps = ISO_DATE_RE.captures(s)?;
    let y = caps[1].parse().ok()?;
    let m = caps[2].parse().ok()?;
    let d = caps[3].parse().ok()?;
    NaiveDate::from_ymd_opt(y, m, d)
}

/// Recognizes "$12.50", "-$3", "€ 4", and "12.50 USD".
pub fn parse_currency(s: &str) -> Option<(Decimal, String)> {
    if let Some(caps) = CURRENCY_PREFIX_RE.captures(s) {
        let negative = &caps[1] == "-" || &caps[3] == "-";
        if !caps[1].is_empty() && !caps[3].is_empty() {
            return None;
        }
        let amount = parse_decimal(&caps[4])?;
        let amount = if negative { -amount } else { amount };
        return Some((amount, caps[2].to_string()));
    }
    if let Some(caps) = CURRENCY_SUFFIX_RE.captures(s) {
        if CURRENCY_CODES.contains(&&caps[2]) {
            return Some((parse_decimal(&caps[1])?, caps[2].to_string()));
        }
    }
    None
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization is infallible")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    Csv,
    Markdown,
    JsonRows,
}

impl fmt::Display for TableFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableFormat::Csv => "csv",
            TableFormat::Markdown => "markdown",
            TableFormat::JsonRows => "json_rows",
        })
    }
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            "json_rows" | "json" => Ok(TableFormat::JsonRows),
            other => Err(format!("unsupported table format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Col,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Row => "row",
            Axis::Col => "col",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("{format} parse error at line {line}: {message}")]
    Parse {
        format: TableFormat,
        line: usize,
        message: String,
    },
    #[error("{axis} index {index} out of bounds (len {len})")]
    IndexOutOfBounds { axis: Axis, index: usize, len: usize },
    #[error("row {row} has {found} cells, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
}

/// A caption plus a rectangular grid of typed cells.
///
/// Immutable once constructed; [`Table::new`] rejects ragged rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Table {
    caption: String,
    headers: Vec<String>,
    rows: Vec<Vec<CellValue>>,
}

impl Table {
    pub fn new(
        caption: impl Into<String>,
        headers: Vec<String>,
        rows: Vec<Vec<CellValue>>,
    ) -> Result<Table, TableError> {
        let width = headers.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(TableError::Ragged {
                    row: i,
                    expected: width,
                    found: row.len(),
                });
            }
        }
        Ok(Table {
            caption: caption.into(),
            headers,
            rows,
        })
    }

    /// Builds a table from ragged input, padding short rows with `Missing`
    /// and widening the header row with empty names when a row is longer.
    pub fn from_ragged(caption: impl Into<String>, mut headers: Vec<String>, mut rows: Vec<Vec<CellValue>>) -> Table {
        let width = rows
            .iter()
            .map(Vec::len)
            .chain(std::iter::once(headers.len()))
            .max()
            .unwrap_or(0);
        headers.resize(width, String::new());
        for row in &mut rows {
            row.resize(width, CellValue::Missing);
        }
        Table {
            caption: caption.into(),
            headers,
            rows,
        }
    }

    pub fn with_caption(mut self, caption: impl Into<String>) -> Table {
        self.caption = caption.into();
        self
    }

    pub fn caption(&self) -> &str {
        &self.caption
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn rows(&self) -> &[Vec<CellValue>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.headers.len()
    }

    pub fn cell_at(&self, row: usize, col: usize) -> Result<&CellValue, TableError> {
        if row >= self.n_rows() {
            return Err(TableError::IndexOutOfBounds {
                axis: Axis::Row,
                index: row,
                len: self.n_rows(),
            });
        }
        if col >= self.n_cols() {
            return Err(TableError::IndexOutOfBounds {
                axis: Axis::Col,
                index: col,
                len: self.n_cols(),
            });
        }
        Ok(&self.rows[row][col])
    }

    pub fn column(&self, col: usize) -> Result<Vec<CellValue>, TableError> {
        if col >= self.n_cols() {
            return Err(TableError::IndexOutOfBounds {
                axis: Axis::Col,
                index: col,
                len: self.n_cols(),
            });
        }
        Ok(self.rows.iter().map(|r| r[col].clone()).collect())
    }

    /// Returns a copy with every cell passed through `f(row, col, cell)`.
    /// Shape is preserved by construction.
    pub fn map_cells(&self, mut f: impl FnMut(usize, usize, &CellValue) -> CellValue) -> Table {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(j, c)| f(i, j, c)).collect())
            .collect();
        Table {
            caption: self.caption.clone(),
            headers: self.headers.clone(),
            rows,
        }
    }

    pub fn with_headers(&self, headers: Vec<String>) -> Table {
        assert_eq!(headers.len(), self.n_cols(), "header count must match width");
        Table {
            caption: self.caption.clone(),
            headers,
            rows: self.rows.clone(),
        }
    }

    pub fn with_rows(&self, rows: Vec<Vec<CellValue>>) -> Result<Table, TableError> {
        Table::new(self.caption.clone(), self.headers.clone(), rows)
    }

    /// Canonical nested-array literal: headers first, then one array per row.
    ///
    /// The caption is not part of the array; prompts carry it separately.
    pub fn serialize_canonical(&self) -> String {
        let mut out = String::from("[");
        out.push('[');
        out.push_str(&self.headers.iter().map(|h| quote(h)).collect::<Vec<_>>().join(", "));
        out.push(']');
        for row in &self.rows {
            out.push_str(", [");
            out.push_str(&row.iter().map(CellValue::to_literal).collect::<Vec<_>>().join(", "));
            out.push(']');
        }
        out.push(']');
        out
    }
}

pub fn parse_table(text: &str, format: TableFormat) -> Result<Table, TableError> {
    if text.trim().is_empty() {
        return Err(TableError::Parse {
            format,
            line: 1,
            message: "empty input".into(),
        });
    }
    match format {
        TableFormat::Csv => parse_csv(text),
        TableFormat::Markdown => parse_markdown(text),
        TableFormat::JsonRows => parse_json_rows(text),
    }
}

fn parse_csv(text: &str) -> Result<Table, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| TableError::Parse {
            format: TableFormat::Csv,
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        records.push(record.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let mut iter = records.into_iter();
    let headers: Vec<String> = iter
        .next()
        .unwrap_or_default()
        .into_iter()
        .map(|h| h.trim().to_string())
        .collect();
    let rows = iter.map(|r| r.iter().map(|c| CellValue::parse(c)).collect()).collect();
    Ok(Table::from_ragged("", headers, rows))
}

fn split_markdown_row(line: &str) -> Vec<String> {
    let mut s = line.trim();
    s = s.strip_prefix('|').unwrap_or(s);
    if s.ends_with('|') && !s.ends_with("\\|") {
        s = &s[..s.len() - 1];
    }
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' if chars.peek() == Some(&'|') => {
                cur.push('|');
                chars.next();
            }
            '|' => cells.push(std::mem::take(&mut cur).trim().to_string()),
            _ => cur.push(c),
        }
    }
    cells.push(cur.trim().to_string());
    cells
}

fn is_separator_row(cells: &[String]) -> bool {
    static SEP: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^:?-+:?$").unwrap());
    !cells.is_empty() && cells.iter().all(|c| SEP.is_match(c))
}

fn parse_markdown(text: &str) -> Result<Table, TableError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let err = |line, message: &str| TableError::Parse {
        format: TableFormat::Markdown,
        line,
        message: message.to_string(),
    };
    for (line, l) in &lines {
        if !l.contains('|') {
            return Err(err(*line, "not a table row"));
        }
    }
    let (_, header_line) = lines[0];
    let headers = split_markdown_row(header_line);
    match lines.get(1) {
        Some((line, l)) if !is_separator_row(&split_markdown_row(l)) => {
            return Err(err(*line, "missing header separator row"))
        }
        None => return Err(err(lines[0].0 + 1, "missing header separator row")),
        _ => {}
    }
    let rows = lines[2..]
        .iter()
        .map(|(_, l)| split_markdown_row(l).iter().map(|c| CellValue::parse(c)).collect())
        .collect();
    Ok(Table::from_ragged("", headers, rows))
}

fn parse_json_rows(text: &str) -> Result<Table, TableError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| TableError::Parse {
        format: TableFormat::JsonRows,
        line: e.line(),
        message: e.to_string(),
    })?;
    table_from_json(&value).map_err(|message| TableError::Parse {
        format: TableFormat::JsonRows,
        line: 1,
        message,
    })
}

/// Builds a table from a JSON array of arrays whose first row is the header.
pub fn table_from_json(value: &serde_json::Value) -> Result<Table, String> {
    let outer = value
        .as_array()
        .ok_or_else(|| "expected an array of arrays".to_string())?;
    let mut rows_iter = outer.iter();
    let headers = match rows_iter.next() {
        Some(first) => first
            .as_array()
            .ok_or_else(|| "header row is not an array".to_string())?
            .iter()
            .map(|v| match v {
                serde_json::Value::String(s) => s.trim().to_string(),
                serde_json::Value::Null => String::new(),
                other => other.to_string(),
            })
            .collect(),
        None => Vec::new(),
    };
    let mut rows = Vec::new();
    for (i, row) in rows_iter.enumerate() {
        let row = row.as_array().ok_or_else(|| format!("row {} is not an array", i + 1))?;
        rows.push(row.iter().map(json_cell).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(Table::from_ragged("", headers, rows))
}

fn json_cell(v: &serde_json::Value) -> Result<CellValue, String> {
    match v {
        serde_json::Value::Null => Ok(CellValue::Missing),
        serde_json::Value::String(s) => Ok(CellValue::parse(s)),
        serde_json::Value::Number(n) => parse_decimal(&n.to_string())
            .map(CellValue::Number)
            .ok_or_else(|| format!("number {n} is out of decimal range")),
        serde_json::Value::Bool(b) => Ok(CellValue::Text(b.to_string())),
        other => Err(format!("nested value {other} is not a cell")),
    }
}
