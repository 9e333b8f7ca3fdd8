use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::config::LabelMap;
use crate::table::{table_from_json, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Question answering: the gold value is an answer.
    Tqa,
    /// Fact verification: the gold value is a dataset label.
    Tfv,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Tqa => "tqa",
            Task::Tfv => "tfv",
        })
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tqa" => Ok(Task::Tqa),
            "tfv" => Ok(Task::Tfv),
            other => Err(format!("unknown task `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub task: Task,
    pub dataset: String,
    pub query: String,
    pub table: Table,
    pub gold: String,
    pub context_text: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecordSchema {
    #[default]
    JsonlV1,
}

impl FromStr for RecordSchema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl_v1" => Ok(RecordSchema::JsonlV1),
            other => Err(format!("unknown record schema `{other}`")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("line {line}: field `{field}`: {message}")]
    Field {
        line: usize,
        field: String,
        message: String,
    },
    #[error("cannot read records: {0}")]
    Io(String),
}

fn field_err(line: usize, field: &str, message: impl Into<String>) -> SchemaError {
    SchemaError::Field {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn required_str(obj: &serde_json::Map<String, Value>, line: usize, field: &str) -> Result<String, SchemaError> {
    match obj.get(field) {
        Some(Value::String(s)) if !s.trim().is_empty() => Ok(s.clone()),
        Some(Value::String(_)) => Err(field_err(line, field, "must not be empty")),
        // numeric ids and gold answers are accepted and kept as written
        Some(Value::Number(n)) if field == "id" || field == "gold" => Ok(n.to_string()),
        Some(_) => Err(field_err(line, field, "must be a string")),
        None => Err(field_err(line, field, "missing")),
    }
}

/// Parses `jsonl_v1` text. When `labels` has an entry for a record's dataset,
/// a verification record's gold value must be one of its labels.
pub fn parse_records(text: &str, labels: &BTreeMap<String, LabelMap>) -> Result<Vec<Record>, SchemaError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(raw).map_err(|e| field_err(line, "<line>", format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| field_err(line, "<line>", "expected a JSON object"))?;

        let id = required_str(obj, line, "id")?;
        let task = required_str(obj, line, "task")?
            .parse::<Task>()
            .map_err(|e| field_err(line, "task", e))?;
        let dataset = required_str(obj, line, "dataset")?;
        let query = required_str(obj, line, "query")?;
        let gold = required_str(obj, line, "gold")?;
        let table_value = obj.get("table").ok_or_else(|| field_err(line, "table", "missing"))?;
        let mut table = table_from_json(table_value).map_err(|e| field_err(line, "table", e))?;
        if table.n_cols() == 0 {
            return Err(field_err(line, "table", "needs a header row"));
        }
        match obj.get("caption") {
            Some(Value::String(c)) => table = table.with_caption(c.clone()),
            None | Some(Value::Null) => {}
            Some(_) => return Err(field_err(line, "caption", "must be a string")),
        }
        let context_text = match obj.get("context_text") {
            Some(Value::String(c)) => Some(c.clone()),
            None | Some(Value::Null) => None,
            Some(_) => return Err(field_err(line, "context_text", "must be a string")),
        };
        if task == Task::Tfv {
            if let Some(map) = labels.get(&dataset) {
                if !map.contains_label(&gold) {
                    return Err(field_err(line, "gold", format!("`{gold}` is not a {dataset} label")));
                }
            }
        }
        out.push(Record {
            id,
            task,
            dataset,
            query,
            table,
            gold,
            context_text,
        });
    }
    Ok(out)
}

pub fn load_records(
    path: &Path,
    schema: RecordSchema,
    labels: &BTreeMap<String, LabelMap>,
) -> Result<Vec<Record>, SchemaError> {
    let RecordSchema::JsonlV1 = schema;
    let text = std::fs::read_to_string(path).map_err(|e| SchemaError::Io(format!("{}: {e}", path.display())))?;
    parse_records(&text, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str =
        r#"{"id":"r1","task":"tqa","dataset":"toy","query":"How many?","table":[["a","b"],[1,"x"]],"gold":"1"}"#;

    #[test]
    fn loads_one_record() {
        let recs = parse_records(ONE, &BTreeMap::new()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].table.headers(), ["a", "b"]);
        assert_eq!(recs[0].task, Task::Tqa);
        assert!(recs[0].context_text.is_none());
    }

    #[test]
    fn missing_gold_is_reported() {
        let line = r#"{"id":"r1","task":"tqa","dataset":"toy","query":"q","table":[["a"]]}"#;
        assert_eq!(
            parse_records(&format!("\n{line}"), &BTreeMap::new()),
            Err(SchemaError::Field {
                line: 2,
                field: "gold".into(),
                message: "missing".into()
            })
        );
    }

    #[test]
    fn verification_gold_must_be_a_label() {
        let mut labels = BTreeMap::new();
        labels.insert(
            "tabfact".to_string(),
            LabelMap {
                labels: vec!["0".into(), "1".into()],
                synonyms: BTreeMap::new(),
            },
        );
        let ok = r#"{"id":"v","task":"tfv","dataset":"tabfact","query":"c","table":[["a"]],"gold":"1"}"#;
        let bad = r#"{"id":"v","task":"tfv","dataset":"tabfact","query":"c","table":[["a"]],"gold":"maybe"}"#;
        assert!(parse_records(ok, &labels).is_ok());
        assert!(matches!(
            parse_records(bad, &labels),
            Err(SchemaError::Field { field, .. }) if field == "gold"
        ));
    }

    #[test]
    fn rejects_bad_task_and_table() {
        let t = r#"{"id":"r","task":"qa","dataset":"d","query":"q","table":[["a"]],"gold":"1"}"#;
        assert!(matches!(parse_records(t, &BTreeMap::new()), Err(SchemaError::Field { field, .. }) if field == "task"));
        let t = r#"{"id":"r","task":"tqa","dataset":"d","query":"q","table":"a,b","gold":"1"}"#;
        assert!(
            matches!(parse_records(t, &BTreeMap::new()), Err(SchemaError::Field { field, .. }) if field == "table")
        );
    }
}
