use std::fmt;

use rust_decimal::Decimal;

use crate::formatter::clean_number;
use crate::plan::Literal;
use crate::table::{fmt_decimal, CellValue, Table};
use crate::toolkit::ParamKind;

use super::{ErrorKind, StepError};

/// Runtime value bound to a plan variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(CellValue),
    Column {
        header: String,
        cells: Vec<CellValue>,
    },
    Row {
        headers: Vec<String>,
        cells: Vec<CellValue>,
    },
    Table(Table),
    Bool(bool),
    Str(String),
    ListNum(Vec<Decimal>),
}

impl Value {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Scalar(c) => c.kind_name(),
            Value::Column { .. } => "column",
            Value::Row { .. } => "row",
            Value::Table(_) => "table",
            Value::Bool(_) => "bool",
            Value::Str(_) => "string",
            Value::ListNum(_) => "list_number",
        }
    }

    pub fn from_literal(lit: &Literal) -> Result<Value, StepError> {
        Ok(match lit {
            Literal::Number(d) => Value::Scalar(CellValue::Number(*d)),
            Literal::Str(s) => Value::Str(s.clone()),
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Array(items) => {
                if items.iter().all(|i| matches!(i, Literal::Number(_))) {
                    Value::ListNum(
                        items
                            .iter()
                            .filter_map(|i| match i {
                                Literal::Number(d) => Some(*d),
                                _ => None,
                            })
                            .collect(),
                    )
                } else {
                    let cells = items
                        .iter()
                        .map(|i| match i {
                            Literal::Str(s) => Ok(CellValue::parse(s)),
                            Literal::Bool(b) => Ok(CellValue::Text(b.to_string())),
                            _ => Err(StepError::new(ErrorKind::TypeMismatch, "nested arrays are not values")),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Value::Column {
                        header: String::new(),
                        cells,
                    }
                }
            }
        })
    }

    /// Answer text: booleans become yes/no, collections become array literals.
    pub fn render(&self) -> String {
        match self {
            Value::Scalar(c) => c.render_plain(),
            Value::Str(s) => s.clone(),
            Value::Bool(true) => "yes".into(),
            Value::Bool(false) => "no".into(),
            Value::Column { cells, .. } | Value::Row { cells, .. } => {
                array_literal(cells.iter().map(CellValue::to_literal))
            }
            Value::ListNum(xs) => array_literal(xs.iter().map(|d| fmt_decimal(*d))),
            Value::Table(t) => t.serialize_canonical(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // quoted so traces distinguish "5" from 5
            Value::Str(s) => f.write_str(&serde_json::to_string(s).unwrap()),
            Value::Bool(b) => write!(f, "{b}"),
            other => f.write_str(&other.render()),
        }
    }
}

fn array_literal(items: impl Iterator<Item = String>) -> String {
    format!("[{}]", items.collect::<Vec<_>>().join(", "))
}

fn mismatch(kind: ParamKind, got: &Value) -> StepError {
    StepError::new(
        ErrorKind::TypeMismatch,
        format!("expected {kind}, got {}", got.kind_name()),
    )
}

/// Numeric magnitude of a cell, using the formatter's cleaning rules for text.
pub fn cell_number(cell: &CellValue) -> Option<Decimal> {
    match cell {
        CellValue::Text(s) => clean_number(s),
        other => other.as_decimal(),
    }
}

/// Converts a value to the kind a tool parameter expects.
pub fn coerce(value: &Value, kind: ParamKind) -> Result<Value, StepError> {
    match (kind, value) {
        (ParamKind::Any, v) => Ok(v.clone()),
        (ParamKind::Number, Value::Scalar(c)) => cell_number(c)
            .map(|d| Value::Scalar(CellValue::Number(d)))
            .ok_or_else(|| mismatch(kind, value)),
        (ParamKind::Number, Value::Str(s)) => clean_number(s)
            .map(|d| Value::Scalar(CellValue::Number(d)))
            .ok_or_else(|| mismatch(kind, value)),
        (ParamKind::ListNumber, Value::ListNum(_)) => Ok(value.clone()),
        (ParamKind::ListNumber, Value::Column { cells, .. }) => cells
            .iter()
            .map(cell_number)
            .collect::<Option<Vec<_>>>()
            .map(Value::ListNum)
            .ok_or_else(|| {
                StepError::new(
                    ErrorKind::TypeMismatch,
                    "expected list_number, got a column with non-numeric cells",
                )
            }),
        (ParamKind::String, Value::Str(_)) => Ok(value.clone()),
        (ParamKind::String, Value::Scalar(CellValue::Text(s))) => Ok(Value::Str(s.clone())),
        (ParamKind::Table, Value::Table(_))
        | (ParamKind::Column, Value::Column { .. })
        | (ParamKind::Row, Value::Row { .. })
        | (ParamKind::Bool, Value::Bool(_)) => Ok(value.clone()),
        _ => Err(mismatch(kind, value)),
    }
}
