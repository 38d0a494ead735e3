//! Structured run reports: one JSON document per run, with a CSV mirror.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Result};

pub const SCHEMA_VERSION: &str = "sl2count-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

fn nullable_f64<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(de)?.unwrap_or(f64::NAN))
}

/// A measured value against its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    /// Non-finite values serialize as `null` and read back as NaN.
    #[serde(deserialize_with = "nullable_f64")]
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub pass: bool,
}

impl Criterion {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Criterion {
            name: name.into(),
            value,
            comparison: Comparison::AtMost,
            threshold,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Criterion {
            name: name.into(),
            value,
            comparison: Comparison::AtLeast,
            threshold,
            pass: value >= threshold,
        }
    }

    /// Replaces the threshold and re-evaluates `pass`.
    pub fn rethreshold(&mut self, threshold: f64) {
        self.threshold = threshold;
        self.pass = match self.comparison {
            Comparison::AtMost => self.value <= threshold,
            Comparison::AtLeast => self.value >= threshold,
        };
    }

    /// Boolean outcome recorded as a count of violations against zero.
    pub fn holds(name: impl Into<String>, violations: usize) -> Self {
        Self::at_most(name, violations as f64, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub tables: Vec<Table>,
    pub criteria: Vec<Criterion>,
}

impl Report {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Report {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.into(),
            params: BTreeMap::new(),
            seed,
            tables: Vec::new(),
            criteria: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Criterion> {
        self.criteria.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }

    /// Flat CSV mirror; the first column names the section a record belongs to.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        let scalar = |v: &Value| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let io = |e: csv::Error| invalid(format!("csv: {e}"));
        out.write_record(["report", "schema_version", "command", "seed"]).map_err(io)?;
        out.write_record(["report", &self.schema_version, &self.command, &self.seed.to_string()]).map_err(io)?;
        for (key, value) in &self.params {
            out.write_record(["param", key.as_str(), &scalar(value)]).map_err(io)?;
        }
        for t in &self.tables {
            let mut header = vec![format!("table:{}", t.name)];
            header.extend(t.columns.iter().cloned());
            out.write_record(&header).map_err(io)?;
            for row in &t.rows {
                let mut record = vec![format!("row:{}", t.name)];
                record.extend(row.iter().map(scalar));
                out.write_record(&record).map_err(io)?;
            }
        }
        out.write_record(["criterion", "name", "value", "comparison", "threshold", "pass"]).map_err(io)?;
        for c in &self.criteria {
            let cmp = match c.comparison {
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
            };
            out.write_record([
                "criterion",
                c.name.as_str(),
                &json!(c.value).to_string(),
                cmp,
                &json!(c.threshold).to_string(),
                &c.pass.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = out.into_inner().map_err(|e| invalid(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| invalid(format!("csv: {e}")))
    }
}

/// JSON Schema of the report document.
pub fn schema() -> Value {
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "sl2count report",
        "type": "object",
        "required": ["schema_version", "command", "params", "seed", "tables", "criteria"],
        "additionalProperties": false,
        "properties": {
            "schema_version": { "const": SCHEMA_VERSION },
            "command": { "type": "string" },
            "params": { "type": "object" },
            "seed": { "type": "integer", "minimum": 0 },
            "tables": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "columns", "rows"],
                    "additionalProperties": false,
                    "properties": {
                        "name": { "type": "string" },
                        "columns": { "type": "array", "items": { "type": "string" } },
                        "rows": { "type": "array", "items": { "type": "array" } }
                    }
                }
            },
            "criteria": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "value", "comparison", "threshold", "pass"],
                    "additionalProperties": false,
                    "properties": {
                        "name": { "type": "string" },
                        "value": { "type": ["number", "null"] },
                        "comparison": { "enum": ["<=", ">="] },
                        "threshold": { "type": "number" },
                        "pass": { "type": "boolean" }
                    }
                }
            }
        }
    })
}

/// Checks a parsed document against [`schema`], including row widths.
pub fn validate(doc: &Value) -> Result<()> {
    let fail = |msg: String| Err(invalid(format!("report schema: {msg}")));
    let Some(obj) = doc.as_object() else {
        return fail("document is not an object".into());
    };
    let expected = ["schema_version", "command", "params", "seed", "tables", "criteria"];
    for key in obj.keys() {
        if !expected.contains(&key.as_str()) {
            return fail(format!("unexpected field {key}"));
        }
    }
    if obj.get("schema_version").and_then(Value::as_str) != Some(SCHEMA_VERSION) {
        return fail("schema_version mismatch".into());
    }
    let report: Report = match serde_json::from_value(doc.clone()) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    for t in &report.tables {
        if let Some(i) = t.rows.iter().position(|r| r.len() != t.columns.len()) {
            return fail(format!("table {} row {i} has the wrong width", t.name));
        }
    }
    Ok(())
}
