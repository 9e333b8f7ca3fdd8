//! Semantics of the builtin tools. Arguments arrive already coerced to the
//! parameter kinds declared in the registry.

use std::cmp::Ordering;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;

use super::value::{cell_number, coerce, Value};
use super::{ErrorKind, StepError};
use crate::table::{CellValue, Table};
use crate::toolkit::ParamKind;

fn err(kind: ErrorKind, message: impl Into<String>) -> StepError {
    StepError::new(kind, message)
}

fn number(v: &Value) -> Decimal {
    match v {
        Value::Scalar(c) => c.as_decimal().unwrap_or_default(),
        _ => Decimal::ZERO,
    }
}

fn list(v: &Value) -> &[Decimal] {
    match v {
        Value::ListNum(xs) => xs,
        _ => &[],
    }
}

fn text(v: &Value) -> &str {
    match v {
        Value::Str(s) => s,
        _ => "",
    }
}

fn table(v: &Value) -> &Table {
    match v {
        Value::Table(t) => t,
        _ => unreachable!("coerced to table"),
    }
}

fn cells(v: &Value) -> &[CellValue] {
    match v {
        Value::Column { cells, .. } | Value::Row { cells, .. } => cells,
        _ => &[],
    }
}

fn key(s: &str) -> String {
    s.trim().to_lowercase()
}

fn index(v: &Value, len: usize) -> Result<usize, StepError> {
    let d = number(v);
    if !d.fract().is_zero() {
        return Err(err(ErrorKind::InvalidArgument, format!("index {d} is not an integer")));
    }
    if (d.is_sign_negative() && !d.is_zero()) || d >= Decimal::from(len) {
        return Err(err(
            ErrorKind::IndexOutOfBounds,
            format!("index {d} is outside 0..{len}"),
        ));
    }
    Ok(d.to_usize().expect("bounded by len"))
}

fn num_value(d: Decimal) -> Value {
    Value::Scalar(CellValue::Number(d.normalize()))
}

fn arith(a: Decimal, b: Decimal, op: fn(Decimal, Decimal) -> Option<Decimal>) -> Result<Value, StepError> {
    op(a, b)
        .map(num_value)
        .ok_or_else(|| err(ErrorKind::InvalidArgument, "arithmetic overflow"))
}

/// Text used when values are compared as strings.
fn compare_text(v: &Value) -> String {
    match v {
        Value::Scalar(c) => c.render_plain(),
        Value::Str(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        other => other.render(),
    }
}

fn as_number(v: &Value) -> Option<Decimal> {
    match coerce(v, ParamKind::Number) {
        Ok(Value::Scalar(c)) => c.as_decimal(),
        _ => None,
    }
}

/// Numeric comparison when both sides coerce to numbers, else comparison of
/// trimmed, case-folded text.
fn compare(a: &Value, b: &Value) -> Ordering {
    match (as_number(a), as_number(b)) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => key(&compare_text(a)).cmp(&key(&compare_text(b))),
    }
}

fn cell_matches(cell: &CellValue, value: &Value) -> bool {
    let numeric = match (cell_number(cell), as_number(value)) {
        (Some(x), Some(y)) => Some(x == y),
        _ => None,
    };
    numeric.unwrap_or_else(|| key(&cell.render_plain()) == key(&compare_text(value)))
}

fn column_index(t: &Table, name: &str) -> Result<usize, StepError> {
    t.headers()
        .iter()
        .position(|h| key(h) == key(name))
        .ok_or_else(|| err(ErrorKind::ColumnNotFound, format!("no column named `{name}`")))
}

fn extreme(xs: &[Decimal], want: Ordering) -> Result<usize, StepError> {
    if xs.is_empty() {
        return Err(err(ErrorKind::EmptyInput, "empty list"));
    }
    let mut best = 0;
    for (i, x) in xs.iter().enumerate().skip(1) {
        // strict comparison keeps the lowest index on ties
        if x.cmp(&xs[best]) == want {
            best = i;
        }
    }
    Ok(best)
}

fn linear_regression(xs: &[Decimal], ys: &[Decimal]) -> Result<Value, StepError> {
    if xs.len() != ys.len() {
        return Err(err(
            ErrorKind::InvalidArgument,
            format!("{} xs but {} ys", xs.len(), ys.len()),
        ));
    }
    if xs.len() < 2 {
        return Err(err(ErrorKind::InvalidArgument, "need at least two points"));
    }
    let overflow = || err(ErrorKind::InvalidArgument, "arithmetic overflow");
    let n = Decimal::from(xs.len());
    let mut sx = Decimal::ZERO;
    let mut sy = Decimal::ZERO;
    let mut sxx = Decimal::ZERO;
    let mut sxy = Decimal::ZERO;
    for (x, y) in xs.iter().zip(ys) {
        sx = sx.checked_add(*x).ok_or_else(overflow)?;
        sy = sy.checked_add(*y).ok_or_else(overflow)?;
        sxx = sxx
            .checked_add(x.checked_mul(*x).ok_or_else(overflow)?)
            .ok_or_else(overflow)?;
        sxy = sxy
            .checked_add(x.checked_mul(*y).ok_or_else(overflow)?)
            .ok_or_else(overflow)?;
    }
    let num = n
        .checked_mul(sxy)
        .and_then(|a| sx.checked_mul(sy).and_then(|b| a.checked_sub(b)))
        .ok_or_else(overflow)?;
    let den = n
        .checked_mul(sxx)
        .and_then(|a| sx.checked_mul(sx).and_then(|b| a.checked_sub(b)))
        .ok_or_else(overflow)?;
    if den.is_zero() {
        return Err(err(ErrorKind::DivByZero, "all xs are equal"));
    }
    let slope = num.checked_div(den).ok_or_else(overflow)?;
    let intercept = sy
        .checked_sub(slope.checked_mul(sx).ok_or_else(overflow)?)
        .and_then(|d| d.checked_div(n))
        .ok_or_else(overflow)?;
    Ok(Value::ListNum(vec![slope.normalize(), intercept.normalize()]))
}

/// Evaluates a builtin by canonical name.
pub fn call(tool: &str, args: &[Value]) -> Result<Value, StepError> {
    let a = |i: usize| &args[i];
    match tool {
        "get_column_by_name" => {
            let t = table(a(0));
            let j = column_index(t, text(a(1)))?;
            Ok(Value::Column {
                header: t.headers()[j].clone(),
                cells: t.rows().iter().map(|r| r[j].clone()).collect(),
            })
        }
        "get_column_by_index" => {
            let t = table(a(0));
            let j = index(a(1), t.n_cols())?;
            Ok(Value::Column {
                header: t.headers()[j].clone(),
                cells: t.rows().iter().map(|r| r[j].clone()).collect(),
            })
        }
        "get_row_by_name" => {
            let t = table(a(0));
            let name = key(text(a(1)));
            t.rows()
                .iter()
                .find(|r| r.first().is_some_and(|c| key(&c.render_plain()) == name))
                .map(|r| Value::Row {
                    headers: t.headers().to_vec(),
                    cells: r.clone(),
                })
                .ok_or_else(|| err(ErrorKind::RowNotFound, format!("no row named `{}`", text(a(1)))))
        }
        "get_row_index_by_value" => cells(a(0))
            .iter()
            .position(|c| cell_matches(c, a(1)))
            .map(|i| num_value(Decimal::from(i)))
            .ok_or_else(|| err(ErrorKind::RowNotFound, format!("no cell equals {}", a(1)))),
        "get_column_cell_value" => {
            let cs = cells(a(0));
            let i = index(a(1), cs.len())?;
            Ok(Value::Scalar(cs[i].clone()))
        }
        "extract_price" => as_number(a(0))
            .map(num_value)
            .ok_or_else(|| err(ErrorKind::TypeMismatch, format!("no price in {}", a(0)))),
        "filter_rows" => {
            let t = table(a(0));
            let j = column_index(t, text(a(1)))?;
            let rows: Vec<Vec<CellValue>> = t.rows().iter().filter(|r| cell_matches(&r[j], a(2))).cloned().collect();
            Ok(Value::Table(
                t.with_rows(rows)
                    .map_err(|e| err(ErrorKind::InvalidArgument, e.to_string()))?,
            ))
        }
        "add" => arith(number(a(0)), number(a(1)), Decimal::checked_add),
        "subtract" => arith(number(a(0)), number(a(1)), Decimal::checked_sub),
        "multiply" => arith(number(a(0)), number(a(1)), Decimal::checked_mul),
        "divide" => {
            if number(a(1)).is_zero() {
                return Err(err(ErrorKind::DivByZero, "division by zero"));
            }
            arith(number(a(0)), number(a(1)), Decimal::checked_div)
        }
        "sum" => list(a(0))
            .iter()
            .try_fold(Decimal::ZERO, |acc, x| acc.checked_add(*x))
            .map(num_value)
            .ok_or_else(|| err(ErrorKind::InvalidArgument, "arithmetic overflow")),
        "average" => {
            let xs = list(a(0));
            if xs.is_empty() {
                return Err(err(ErrorKind::EmptyInput, "empty list"));
            }
            let total = xs
                .iter()
                .try_fold(Decimal::ZERO, |acc, x| acc.checked_add(*x))
                .ok_or_else(|| err(ErrorKind::InvalidArgument, "arithmetic overflow"))?;
            arith(total, Decimal::from(xs.len()), Decimal::checked_div)
        }
        "min" => extreme(list(a(0)), Ordering::Less).map(|i| num_value(list(a(0))[i])),
        "max" => extreme(list(a(0)), Ordering::Greater).map(|i| num_value(list(a(0))[i])),
        "argmin" => extreme(list(a(0)), Ordering::Less).map(|i| num_value(Decimal::from(i))),
        "argmax" => extreme(list(a(0)), Ordering::Greater).map(|i| num_value(Decimal::from(i))),
        "count" => {
            let n = match a(0) {
                Value::Column { cells, .. } | Value::Row { cells, .. } => cells.len(),
                Value::ListNum(xs) => xs.len(),
                Value::Table(t) => t.n_rows(),
                other => {
                    return Err(err(
                        ErrorKind::TypeMismatch,
                        format!("cannot count a {}", other.kind_name()),
                    ))
                }
            };
            Ok(num_value(Decimal::from(n)))
        }
        "equal_to" => Ok(Value::Bool(compare(a(0), a(1)) == Ordering::Equal)),
        "greater_than" => Ok(Value::Bool(compare(a(0), a(1)) == Ordering::Greater)),
        "less_than" => Ok(Value::Bool(compare(a(0), a(1)) == Ordering::Less)),
        "linear_regression" => linear_regression(list(a(0)), list(a(1))),
        other => Err(err(ErrorKind::UnknownTool, format!("`{other}` has no implementation"))),
    }
}
