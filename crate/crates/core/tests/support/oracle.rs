//! Brute-force plan evaluator in exact rational arithmetic, and random
//! table/plan blueprints to compare the executor against it.
#![allow(dead_code)]

use std::cmp::Ordering;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rust_decimal::Decimal;
use tabrex_core::executor::{execute_plan, ErrorKind};
use tabrex_core::plan::{ArgExpr, Literal, Plan};
use tabrex_core::table::{CellValue, Table};
use tabrex_core::toolkit::builtin_registry;

// ---------- exact rationals ----------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rat {
    num: i128,
    den: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Rat {
    fn new(num: i128, den: i128) -> Rat {
        assert!(den != 0);
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Rat {
            num: s * num / g,
            den: s * den / g,
        }
    }
    fn int(n: i128) -> Rat {
        Rat::new(n, 1)
    }
    fn add(self, o: Rat) -> Rat {
        Rat::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }
    fn sub(self, o: Rat) -> Rat {
        Rat::new(self.num * o.den - o.num * self.den, self.den * o.den)
    }
    fn mul(self, o: Rat) -> Rat {
        Rat::new(self.num * o.num, self.den * o.den)
    }
    fn div(self, o: Rat) -> Rat {
        Rat::new(self.num * o.den, self.den * o.num)
    }
    fn is_zero(self) -> bool {
        self.num == 0
    }
    fn is_int(self) -> bool {
        self.den == 1
    }
    fn terminates(self) -> bool {
        let mut d = self.den;
        while d % 2 == 0 {
            d /= 2;
        }
        while d % 5 == 0 {
            d /= 5;
        }
        d == 1
    }
    /// Plain decimal text, no trailing zeros.
    fn render(self) -> String {
        if !self.terminates() {
            // only reached for cases the comparison skips
            return format!("{}/{}", self.num, self.den);
        }
        let mut k = 0;
        let mut scale: i128 = 1;
        while scale % self.den != 0 {
            scale *= 10;
            k += 1;
        }
        let scaled = self.num * (scale / self.den);
        let neg = scaled < 0;
        let digits = format!("{:0>width$}", scaled.abs(), width = k + 1);
        let (int, frac) = digits.split_at(digits.len() - k);
        let frac = frac.trim_end_matches('0');
        let sign = if neg { "-" } else { "" };
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, o: &Rat) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Rat {
    fn cmp(&self, o: &Rat) -> Ordering {
        (self.num * o.den).cmp(&(o.num * self.den))
    }
}

// ---------- oracle values ----------

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(Rat),
    Word(String),
    Empty,
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(r) => r.render(),
            Cell::Word(w) => w.clone(),
            Cell::Empty => String::new(),
        }
    }
    fn literal(&self) -> String {
        match self {
            Cell::Num(r) => r.render(),
            other => format!("\"{}\"", other.text()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum V {
    Tab(Vec<String>, Vec<Vec<Cell>>),
    Col(Vec<Cell>),
    Row(Vec<Cell>),
    Num(Cell),
    Bool(bool),
    Str(String),
    List(Vec<Rat>),
}

fn show(v: &V) -> String {
    let arr = |items: Vec<String>| format!("[{}]", items.join(", "));
    match v {
        V::Tab(h, rows) => {
            let mut parts = vec![arr(h.iter().map(|x| format!("\"{x}\"")).collect())];
            parts.extend(rows.iter().map(|r| arr(r.iter().map(Cell::literal).collect())));
            arr(parts)
        }
        V::Col(c) | V::Row(c) => arr(c.iter().map(Cell::literal).collect()),
        V::Num(c) => c.text(),
        V::Bool(true) => "yes".into(),
        V::Bool(false) => "no".into(),
        V::Str(s) => s.clone(),
        V::List(xs) => arr(xs.iter().map(|r| r.render()).collect()),
    }
}

type Res<T> = Result<T, ErrorKind>;

fn numeric(v: &V) -> Option<Rat> {
    match v {
        V::Num(Cell::Num(r)) => Some(*r),
        _ => None,
    }
}

fn want_num(v: &V) -> Res<Rat> {
    numeric(v).ok_or(ErrorKind::TypeMismatch)
}

fn want_list(v: &V) -> Res<Vec<Rat>> {
    match v {
        V::List(xs) => Ok(xs.clone()),
        V::Col(cells) => cells
            .iter()
            .map(|c| match c {
                Cell::Num(r) => Ok(*r),
                _ => Err(ErrorKind::TypeMismatch),
            })
            .collect(),
        _ => Err(ErrorKind::TypeMismatch),
    }
}

fn want_str(v: &V) -> Res<String> {
    match v {
        V::Str(s) | V::Num(Cell::Word(s)) => Ok(s.clone()),
        _ => Err(ErrorKind::TypeMismatch),
    }
}

fn want_table(v: &V) -> Res<(Vec<String>, Vec<Vec<Cell>>)> {
    match v {
        V::Tab(h, r) => Ok((h.clone(), r.clone())),
        _ => Err(ErrorKind::TypeMismatch),
    }
}

fn want_col(v: &V) -> Res<Vec<Cell>> {
    match v {
        V::Col(c) => Ok(c.clone()),
        _ => Err(ErrorKind::TypeMismatch),
    }
}

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

fn as_text(v: &V) -> String {
    match v {
        V::Bool(b) => b.to_string(),
        other => show(other),
    }
}

fn order(a: &V, b: &V) -> Ordering {
    match (numeric(a), numeric(b)) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => fold(&as_text(a)).cmp(&fold(&as_text(b))),
    }
}

fn same_cell(c: &Cell, v: &V) -> bool {
    match (c, numeric(v)) {
        (Cell::Num(x), Some(y)) => *x == y,
        _ => fold(&c.text()) == fold(&as_text(v)),
    }
}

fn idx(v: &V, len: usize) -> Res<usize> {
    let r = want_num(v)?;
    if !r.is_int() {
        return Err(ErrorKind::InvalidArgument);
    }
    if r.num < 0 || r.num >= len as i128 {
        return Err(ErrorKind::IndexOutOfBounds);
    }
    Ok(r.num as usize)
}

fn extreme(xs: &[Rat], pick_max: bool) -> Res<usize> {
    if xs.is_empty() {
        return Err(ErrorKind::EmptyInput);
    }
    let mut best = 0;
    for i in 1..xs.len() {
        let better = if pick_max { xs[i] > xs[best] } else { xs[i] < xs[best] };
        if better {
            best = i;
        }
    }
    Ok(best)
}

fn num(r: Rat) -> V {
    V::Num(Cell::Num(r))
}

/// Reference semantics of every builtin, written from the tool descriptions.
fn eval_tool(tool: &str, args: &[V], inexact: &mut bool) -> Res<V> {
    let mut check = |r: Rat| {
        if !r.terminates() {
            *inexact = true;
        }
        r
    };
    let column_at = |h: &[String], name: &str| {
        h.iter()
            .position(|x| fold(x) == fold(name))
            .ok_or(ErrorKind::ColumnNotFound)
    };
    Ok(match tool {
        "get_column_by_name" => {
            let (h, rows) = want_table(&args[0])?;
            let j = column_at(&h, &want_str(&args[1])?)?;
            V::Col(rows.iter().map(|r| r[j].clone()).collect())
        }
        "get_column_by_index" => {
            let (h, rows) = want_table(&args[0])?;
            let j = idx(&args[1], h.len())?;
            V::Col(rows.iter().map(|r| r[j].clone()).collect())
        }
        "get_row_by_name" => {
            let (_, rows) = want_table(&args[0])?;
            let name = fold(&want_str(&args[1])?);
            let row = rows
                .iter()
                .find(|r| fold(&r[0].text()) == name)
                .ok_or(ErrorKind::RowNotFound)?;
            V::Row(row.clone())
        }
        "get_row_index_by_value" => {
            let col = want_col(&args[0])?;
            let i = col
                .iter()
                .position(|c| same_cell(c, &args[1]))
                .ok_or(ErrorKind::RowNotFound)?;
            num(Rat::int(i as i128))
        }
        "get_column_cell_value" => {
            let col = want_col(&args[0])?;
            let i = idx(&args[1], col.len())?;
            V::Num(col[i].clone())
        }
        "extract_price" => num(numeric(&args[0]).ok_or(ErrorKind::TypeMismatch)?),
        "filter_rows" => {
            let (h, rows) = want_table(&args[0])?;
            let j = column_at(&h, &want_str(&args[1])?)?;
            let kept = rows.into_iter().filter(|r| same_cell(&r[j], &args[2])).collect();
            V::Tab(h, kept)
        }
        "add" | "subtract" | "multiply" | "divide" => {
            let a = want_num(&args[0])?;
            let b = want_num(&args[1])?;
            num(check(match tool {
                "add" => a.add(b),
                "subtract" => a.sub(b),
                "multiply" => a.mul(b),
                _ => {
                    if b.is_zero() {
                        return Err(ErrorKind::DivByZero);
                    }
                    a.div(b)
                }
            }))
        }
        "sum" => num(want_list(&args[0])?.iter().fold(Rat::int(0), |a, b| a.add(*b))),
        "average" => {
            let xs = want_list(&args[0])?;
            if xs.is_empty() {
                return Err(ErrorKind::EmptyInput);
            }
            let total = xs.iter().fold(Rat::int(0), |a, b| a.add(*b));
            num(check(total.div(Rat::int(xs.len() as i128))))
        }
        "min" | "max" => {
            let xs = want_list(&args[0])?;
            num(xs[extreme(&xs, tool == "max")?])
        }
        "argmin" | "argmax" => {
            let xs = want_list(&args[0])?;
            num(Rat::int(extreme(&xs, tool == "argmax")? as i128))
        }
        "count" => num(Rat::int(match &args[0] {
            V::Col(c) | V::Row(c) => c.len(),
            V::List(xs) => xs.len(),
            V::Tab(_, rows) => rows.len(),
            _ => return Err(ErrorKind::TypeMismatch),
        } as i128)),
        "equal_to" => V::Bool(order(&args[0], &args[1]) == Ordering::Equal),
        "greater_than" => V::Bool(order(&args[0], &args[1]) == Ordering::Greater),
        "less_than" => V::Bool(order(&args[0], &args[1]) == Ordering::Less),
        "linear_regression" => {
            let xs = want_list(&args[0])?;
            let ys = want_list(&args[1])?;
            if xs.len() != ys.len() || xs.len() < 2 {
                return Err(ErrorKind::InvalidArgument);
            }
            let n = Rat::int(xs.len() as i128);
            let zero = Rat::int(0);
            let sx = xs.iter().fold(zero, |a, b| a.add(*b));
            let sy = ys.iter().fold(zero, |a, b| a.add(*b));
            let sxx = xs.iter().fold(zero, |a, b| a.add(b.mul(*b)));
            let sxy = xs.iter().zip(&ys).fold(zero, |a, (x, y)| a.add(x.mul(*y)));
            let den = n.mul(sxx).sub(sx.mul(sx));
            if den.is_zero() {
                return Err(ErrorKind::DivByZero);
            }
            let slope = check(n.mul(sxy).sub(sx.mul(sy)).div(den));
            let intercept = check(sy.sub(slope.mul(sx)).div(n));
            V::List(vec![slope, intercept])
        }
        other => panic!("generator produced unknown tool {other}"),
    })
}

// ---------- random cases ----------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Table,
    Column,
    Row,
    Number,
    Text,
    List,
    Any,
}

/// (tool, parameter kinds, result kind)
const TOOLS: &[(&str, &[Kind], Kind)] = {
    use Kind::*;
    &[
        ("get_column_by_name", &[Table, Text], Column),
        ("get_column_by_index", &[Table, Number], Column),
        ("get_row_by_name", &[Table, Text], Row),
        ("get_row_index_by_value", &[Column, Any], Number),
        ("get_column_cell_value", &[Column, Number], Any),
        ("extract_price", &[Any], Number),
        ("filter_rows", &[Table, Text, Any], Table),
        ("add", &[Number, Number], Number),
        ("subtract", &[Number, Number], Number),
        ("multiply", &[Number, Number], Number),
        ("divide", &[Number, Number], Number),
        ("sum", &[List], Number),
        ("average", &[List], Number),
        ("min", &[List], Number),
        ("max", &[List], Number),
        ("count", &[Any], Number),
        ("argmax", &[List], Number),
        ("argmin", &[List], Number),
        ("equal_to", &[Any, Any], Any),
        ("greater_than", &[Any, Any], Any),
        ("less_than", &[Any, Any], Any),
        ("linear_regression", &[List, List], List),
    ]
};

const WORDS: &[&str] = &["red", "Blue", "green", "10 apples"];

#[derive(Debug, Clone)]
pub struct Blueprint {
    width: usize,
    height: usize,
    cells: Vec<(u8, i8, u8)>,
    steps: Vec<(usize, Vec<(u8, u16)>)>,
    answer: u16,
}

pub fn blueprint() -> impl Strategy<Value = Blueprint> {
    (1usize..=6, 0usize..=6).prop_flat_map(|(width, height)| {
        (
            prop::collection::vec((0u8..10, -20i8..=20, 0u8..4), width * height),
            prop::collection::vec(
                (0..TOOLS.len(), prop::collection::vec((0u8..10, any::<u16>()), 3)),
                0..=8,
            ),
            any::<u16>(),
        )
            .prop_map(move |(cells, steps, answer)| Blueprint {
                width,
                height,
                cells,
                steps,
                answer,
            })
    })
}

fn header(j: usize) -> String {
    format!("Col{j}")
}

fn build_cell(kind: u8, n: i8, frac: u8) -> Cell {
    match kind {
        0..=5 => Cell::Num(Rat::new(n as i128 * 4 + frac as i128, 4)),
        6 | 7 => Cell::Word(WORDS[(n.unsigned_abs() as usize) % WORDS.len()].to_string()),
        8 => Cell::Num(Rat::int(n as i128 % 3)),
        _ => Cell::Empty,
    }
}

fn to_cell_value(c: &Cell) -> CellValue {
    match c {
        Cell::Num(r) => CellValue::Number(Decimal::from_str_exact(&r.render()).unwrap()),
        Cell::Word(w) => CellValue::Text(w.clone()),
        Cell::Empty => CellValue::Missing,
    }
}

fn literal_for(kind: Kind, choice: u16, width: usize) -> (Literal, V) {
    let small = (choice % 13) as i64 - 3;
    let number = |d: Decimal| (Literal::Number(d), num(Rat::new(d.mantissa(), 10i128.pow(d.scale()))));
    let text = |s: String| (Literal::Str(s.clone()), V::Str(s));
    match kind {
        Kind::Number => match choice % 7 {
            0 => number(Decimal::new(small * 5 + 2, 1)),
            1 => number(Decimal::ZERO),
            _ => number(Decimal::from(small)),
        },
        Kind::Text => match choice % 5 {
            0 => text("missing".into()),
            1 => text(WORDS[(choice as usize / 5) % WORDS.len()].into()),
            2 => text(format!(" {} ", header((choice as usize / 5) % width).to_uppercase())),
            _ => text(header((choice as usize / 5) % width)),
        },
        Kind::List => {
            let xs: Vec<i64> = (0..(choice % 4)).map(|i| (choice as i64 >> (i * 3)) % 7).collect();
            (
                Literal::Array(xs.iter().map(|&x| Literal::Number(x.into())).collect()),
                V::List(xs.iter().map(|&x| Rat::int(x as i128)).collect()),
            )
        }
        _ => match choice % 4 {
            0 => (
                Literal::Bool(choice.is_multiple_of(8)),
                V::Bool(choice.is_multiple_of(8)),
            ),
            1 => text(WORDS[(choice as usize / 4) % WORDS.len()].into()),
            _ => number(Decimal::from(small)),
        },
    }
}

pub struct Case {
    pub table: Table,
    pub plan: Plan,
    /// Oracle result: answer text, or (step, kind) of the first failure.
    pub expected: Result<String, (usize, ErrorKind)>,
    pub inexact: bool,
}

pub fn realize(bp: &Blueprint) -> Case {
    let headers: Vec<String> = (0..bp.width).map(header).collect();
    let rows: Vec<Vec<Cell>> = bp
        .cells
        .chunks(bp.width)
        .take(bp.height)
        .map(|r| r.iter().map(|&(k, n, f)| build_cell(k, n, f)).collect())
        .collect();
    let table = Table::new(
        "",
        headers.clone(),
        rows.iter().map(|r| r.iter().map(to_cell_value).collect()).collect(),
    )
    .unwrap();

    let mut kinds: Vec<(String, Kind)> = vec![("table_data".into(), Kind::Table)];
    let mut parts = Vec::new();
    let mut arg_values: Vec<Vec<Result<usize, V>>> = Vec::new();
    for (i, (tool_ix, choices)) in bp.steps.iter().enumerate() {
        let (tool, params, returns) = TOOLS[*tool_ix];
        let mut args = Vec::new();
        let mut values = Vec::new();
        for (p, &(mode, choice)) in params.iter().zip(choices) {
            let matching: Vec<usize> = kinds
                .iter()
                .enumerate()
                .filter(|(_, (_, k))| {
                    *k == *p
                        || *p == Kind::Any
                        || *k == Kind::Any
                        || (*p == Kind::List && *k == Kind::Column)
                        || (*p == Kind::Number && *k == Kind::Any)
                })
                .map(|(j, _)| j)
                .collect();
            let use_var = match mode {
                0..=6 => !matching.is_empty(),
                7 => true,
                _ => false,
            };
            let is_literal_kind = matches!(p, Kind::Number | Kind::Text | Kind::List | Kind::Any);
            if use_var || !is_literal_kind {
                let pool: Vec<usize> = if matching.is_empty() || mode == 7 {
                    (0..kinds.len()).collect()
                } else {
                    matching
                };
                let j = pool[choice as usize % pool.len()];
                args.push(ArgExpr::VarRef(kinds[j].0.clone()));
                values.push(Ok(j));
            } else {
                let (lit, v) = literal_for(*p, choice, bp.width);
                args.push(ArgExpr::Lit(lit));
                values.push(Err(v));
            }
        }
        let var = format!("v{i}");
        parts.push((var.clone(), tool.to_string(), args));
        arg_values.push(values);
        kinds.push((var, returns));
    }
    let answer_ix = bp.answer as usize % kinds.len();
    let plan = Plan::from_parts(parts, ArgExpr::VarRef(kinds[answer_ix].0.clone()));

    // brute-force evaluation
    let mut env: Vec<V> = vec![V::Tab(headers, rows)];
    let mut inexact = false;
    let mut expected = Ok(String::new());
    for (i, step) in plan.steps.iter().enumerate() {
        let args: Vec<V> = arg_values[i]
            .iter()
            .map(|a| match a {
                Ok(j) => env[*j].clone(),
                Err(v) => v.clone(),
            })
            .collect();
        match eval_tool(&step.tool, &args, &mut inexact) {
            Ok(v) => env.push(v),
            Err(kind) => {
                expected = Err((i + 1, kind));
                break;
            }
        }
    }
    if expected.is_ok() {
        expected = Ok(show(&env[answer_ix]));
    }
    Case {
        table,
        plan,
        expected,
        inexact,
    }
}

/// Runs `cases` random blueprints and compares the executor to the oracle.
/// Returns how many exact cases were compared and how many of those executed.
pub fn check_against_oracle(cases: u32) -> Result<(usize, usize), String> {
    let registry = builtin_registry();
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    let compared = std::cell::Cell::new(0usize);
    let executed = std::cell::Cell::new(0usize);
    runner
        .run(&blueprint(), |bp| {
            let case = realize(&bp);
            let outcome = execute_plan(&case.plan, &case.table, &registry);
            if case.inexact {
                return Ok(());
            }
            compared.set(compared.get() + 1);
            match &case.expected {
                Ok(answer) => {
                    prop_assert!(outcome.executable, "plan:\n{}\nerror: {:?}", case.plan, outcome.error);
                    prop_assert_eq!(&outcome.answer, answer, "plan:\n{}", case.plan);
                    prop_assert_eq!(outcome.trace.len(), case.plan.steps.len());
                    executed.set(executed.get() + 1);
                }
                Err((step, kind)) => {
                    prop_assert!(!outcome.executable, "plan:\n{}\nanswer {}", case.plan, outcome.answer);
                    let err = outcome.error.clone().unwrap();
                    prop_assert_eq!(
                        (err.step, err.kind),
                        (*step, *kind),
                        "plan:\n{}\n{}",
                        case.plan,
                        err.message
                    );
                    prop_assert_eq!(outcome.trace.len(), step - 1);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok((compared.get(), executed.get()))
}
