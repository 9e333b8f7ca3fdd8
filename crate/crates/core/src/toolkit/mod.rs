//! The builtin tool registry and handling of model-generated tool definitions.
//!
//! Generated tool bodies are never executed. Each generated definition is
//! either mapped onto a builtin (by name or by structural fingerprint) or
//! rejected, which makes any plan calling it non-executable.

mod corpus;
mod fingerprint;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use corpus::{abstract_tools, deduplicate, register_generated, Registration};
pub use fingerprint::{fingerprint_body, ToolDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Table,
    Column,
    Row,
    Number,
    String,
    Bool,
    ListNumber,
    Any,
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamKind::Table => "table",
            ParamKind::Column => "column",
            ParamKind::Row => "row",
            ParamKind::Number => "number",
            ParamKind::String => "string",
            ParamKind::Bool => "bool",
            ParamKind::ListNumber => "list_number",
            ParamKind::Any => "any",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    TablePreprocess,
    Numerical,
    Logical,
    HigherLevel,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::TablePreprocess => "table_preprocess",
            Category::Numerical => "numerical",
            Category::Logical => "logical",
            Category::HigherLevel => "higher_level",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolSpec {
    pub name: String,
    pub params: Vec<Param>,
    pub returns: ParamKind,
    pub category: Category,
    #[serde(default)]
    pub aliases: Vec<String>,
}

impl ToolSpec {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToolkitError {
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
    #[error("name `{0}` is registered more than once")]
    DuplicateName(String),
    #[error("table_preprocess tool `{0}` must take at least one parameter")]
    MissingParams(String),
    #[error("invalid registry file: {0}")]
    Format(String),
}

/// Immutable set of tool specs plus the alias index used for resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    specs: BTreeMap<String, ToolSpec>,
    alias_index: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct RegistryFile {
    tools: Vec<ToolSpec>,
}

/// Normalizes a tool name to snake_case: `getColumnByName` and
/// `Get-Column-By-Name` both become `get_column_by_name`.
pub fn normalize_name(name: &str) -> String {
    let chars: Vec<char> = name.trim().chars().collect();
    let mut out = String::with_capacity(chars.len() + 4);
    for (i, &c) in chars.iter().enumerate() {
        if c == '-' || c == ' ' || c == '_' {
            if !out.ends_with('_') && !out.is_empty() {
                out.push('_');
            }
            continue;
        }
        if c.is_uppercase() {
            let prev = i.checked_sub(1).map(|j| chars[j]);
            let next = chars.get(i + 1).copied();
            let boundary = match prev {
                Some(p) if p.is_lowercase() || p.is_ascii_digit() => true,
                Some(p) if p.is_uppercase() => next.is_some_and(|n| n.is_lowercase()),
                _ => false,
            };
            if boundary && !out.ends_with('_') {
                out.push('_');
            }
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out.trim_end_matches('_').to_string()
}

impl Registry {
    pub fn new(specs: Vec<ToolSpec>) -> Result<Registry, ToolkitError> {
        let mut by_name = BTreeMap::new();
        let mut alias_index = BTreeMap::new();
        for spec in specs {
            if spec.category == Category::TablePreprocess && spec.params.is_empty() {
                return Err(ToolkitError::MissingParams(spec.name));
            }
            let canonical = normalize_name(&spec.name);
            for key in std::iter::once(&spec.name).chain(&spec.aliases) {
                let key = normalize_name(key);
                if alias_index.insert(key.clone(), canonical.clone()).is_some() {
                    return Err(ToolkitError::DuplicateName(key));
                }
            }
            by_name.insert(canonical, spec);
        }
        Ok(Registry {
            specs: by_name,
            alias_index,
        })
    }

    /// Canonical spec for `name` after snake_case normalization and alias lookup.
    pub fn resolve(&self, name: &str) -> Result<&ToolSpec, ToolkitError> {
        self.alias_index
            .get(&normalize_name(name))
            .and_then(|canonical| self.specs.get(canonical))
            .ok_or_else(|| ToolkitError::UnknownTool(name.to_string()))
    }

    pub fn specs(&self) -> impl Iterator<Item = &ToolSpec> {
        self.specs.values()
    }

    pub fn alias_index(&self) -> &BTreeMap<String, String> {
        &self.alias_index
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// A copy with `extra` added; used to check that more tools never add diagnostics.
    pub fn with_extra(&self, extra: Vec<ToolSpec>) -> Result<Registry, ToolkitError> {
        Registry::new(self.specs.values().cloned().chain(extra).collect())
    }

    pub fn to_toml(&self) -> String {
        let file = RegistryFile {
            tools: self.specs.values().cloned().collect(),
        };
        toml::to_string(&file).expect("registry serializes")
    }

    pub fn from_toml(text: &str) -> Result<Registry, ToolkitError> {
        let file: RegistryFile = toml::from_str(text).map_err(|e| ToolkitError::Format(e.to_string()))?;
        Registry::new(file.tools)
    }

    /// SHA-256 of the serialized inventory, pinned into run manifests.
    pub fn content_hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn spec(
    name: &str,
    params: &[(&str, ParamKind)],
    returns: ParamKind,
    category: Category,
    aliases: &[&str],
) -> ToolSpec {
    ToolSpec {
        name: name.to_string(),
        params: params
            .iter()
            .map(|(n, k)| Param {
                name: n.to_string(),
                kind: *k,
            })
            .collect(),
        returns,
        category,
        aliases: aliases.iter().map(|a| a.to_string()).collect(),
    }
}

/// The builtin tool inventory.
pub fn builtin_specs() -> Vec<ToolSpec> {
    use Category::*;
    use ParamKind::*;
    let binary = [("a", Number), ("b", Number)];
    let compare = [("a", Any), ("b", Any)];
    let reduce = [("values", ListNumber)];
    vec![
        spec(
            "get_column_by_name",
            &[("table", Table), ("name", String)],
            Column,
            TablePreprocess,
            &[],
        ),
        spec(
            "get_column_by_index",
            &[("table", Table), ("index", Number)],
            Column,
            TablePreprocess,
            &[],
        ),
        spec(
            "get_row_by_name",
            &[("table", Table), ("name", String)],
            Row,
            TablePreprocess,
            &[],
        ),
        spec(
            "get_row_index_by_value",
            &[("column", Column), ("value", Any)],
            Number,
            TablePreprocess,
            &[],
        ),
        spec(
            "get_column_cell_value",
            &[("column", Column), ("index", Number)],
            Any,
            TablePreprocess,
            &["get_cell"],
        ),
        spec("extract_price", &[("text", Any)], Number, TablePreprocess, &[]),
        spec(
            "filter_rows",
            &[("table", Table), ("column", String), ("value", Any)],
            Table,
            TablePreprocess,
            &[],
        ),
        spec("add", &binary, Number, Numerical, &[]),
        spec("subtract", &binary, Number, Numerical, &[]),
        spec("multiply", &binary, Number, Numerical, &[]),
        spec("divide", &binary, Number, Numerical, &[]),
        spec("sum", &reduce, Number, Numerical, &["total"]),
        spec("average", &reduce, Number, Numerical, &["mean"]),
        spec("min", &reduce, Number, Numerical, &[]),
        spec("max", &reduce, Number, Numerical, &[]),
        spec("count", &[("values", Any)], Number, Numerical, &[]),
        spec("argmax", &reduce, Number, Numerical, &[]),
        spec("argmin", &reduce, Number, Numerical, &[]),
        spec("equal_to", &compare, Bool, Logical, &[]),
        spec("greater_than", &compare, Bool, Logical, &[]),
        spec("less_than", &compare, Bool, Logical, &[]),
        spec(
            "linear_regression",
            &[("xs", ListNumber), ("ys", ListNumber)],
            ListNumber,
            HigherLevel,
            &[],
        ),
    ]
}

static BUILTIN: LazyLock<Registry> =
    LazyLock::new(|| Registry::new(builtin_specs()).expect("builtin inventory is consistent"));

pub fn builtin_registry() -> Registry {
    BUILTIN.clone()
}

/// Reference Python implementations of builtins. A generated definition whose
/// fingerprint matches one of these is mapped to that builtin.
pub const REFERENCE_SOURCES: &[(&str, &str)] = &[
    ("add", "def add(a, b):\n    return a + b"),
    ("subtract", "def subtract(a, b):\n    return a - b"),
    ("multiply", "def multiply(a, b):\n    return a * b"),
    ("divide", "def divide(a, b):\n    return a / b"),
    ("sum", "def sum_values(values):\n    return sum(values)"),
    ("average", "def average(values):\n    return sum(values) / len(values)"),
    ("min", "def min_value(values):\n    return min(values)"),
    ("max", "def max_value(values):\n    return max(values)"),
    ("count", "def count(values):\n    return len(values)"),
    ("argmax", "def argmax(values):\n    return values.index(max(values))"),
    ("argmin", "def argmin(values):\n    return values.index(min(values))"),
    ("equal_to", "def equal_to(a, b):\n    return a == b"),
    ("greater_than", "def greater_than(a, b):\n    return a > b"),
    ("less_than", "def less_than(a, b):\n    return a < b"),
    (
        "get_column_by_name",
        "def get_column_by_name(table, name):\n    index = table[0].index(name)\n    return [row[index] for row in table[1:]]",
    ),
    (
        "get_column_by_index",
        "def get_column_by_index(table, index):\n    return [row[index] for row in table[1:]]",
    ),
    (
        "get_column_cell_value",
        "def get_column_cell_value(column, index):\n    return column[index]",
    ),
    (
        "get_row_index_by_value",
        "def get_row_index_by_value(column, value):\n    return column.index(value)",
    ),
    (
        "get_row_by_name",
        "def get_row_by_name(table, name):\n    for row in table[1:]:\n        if row[0] == name:\n            return row",
    ),
    (
        "extract_price",
        "def extract_price(text):\n    return float(text.replace('$', '').replace(',', ''))",
    ),
];
