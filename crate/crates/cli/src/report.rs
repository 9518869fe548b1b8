use std::collections::BTreeMap;
use std::io::Write;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use serde_json::{Map, Value};

use crate::config::Format;
use crate::schema::SCHEMA_VERSION;

/// Key-value list that keeps insertion order when serialized.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record(pub Vec<(String, Value)>);

impl Record {
    pub fn new() -> Self {
        Record(Vec::new())
    }

    pub fn with(mut self, key: &str, value: impl Into<Cell>) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<Cell>) {
        self.0.push((key.to_string(), value.into().0));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// JSON value for a report cell. Non-finite floats become strings.
pub struct Cell(pub Value);

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell(match serde_json::Number::from_f64(x) {
            Some(n) => Value::Number(n),
            None if x.is_nan() => Value::from("nan"),
            None if x > 0.0 => Value::from("inf"),
            None => Value::from("-inf"),
        })
    }
}

impl From<u128> for Cell {
    fn from(x: u128) -> Self {
        Cell(match u64::try_from(x) {
            Ok(v) => Value::from(v),
            Err(_) => Value::from(x.to_string()),
        })
    }
}

macro_rules! cell_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(x: $t) -> Self {
                Cell(Value::from(x))
            }
        }
    )*};
}
cell_from!(usize, u64, i64, bool, &str, String);

impl From<Value> for Cell {
    fn from(v: Value) -> Self {
        Cell(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: String,
    pub seed: u64,
    pub input: Map<String, Value>,
    pub summary: Record,
    pub rows: Vec<Record>,
    pub verdicts: Vec<Verdict>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub documents: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: &str, seed: u64, input: Map<String, Value>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            input,
            summary: Record::new(),
            rows: Vec::new(),
            verdicts: Vec::new(),
            documents: BTreeMap::new(),
        }
    }

    pub fn verdict(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// Column names in order of first appearance.
    pub fn columns(&self) -> Vec<&str> {
        let mut cols: Vec<&str> = Vec::new();
        for row in &self.rows {
            for (k, _) in &row.0 {
                if !cols.contains(&k.as_str()) {
                    cols.push(k);
                }
            }
        }
        cols
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(self).expect("report values are plain JSON");
                out.push(b'\n');
                out
            }
            Format::Csv => self.to_csv(),
        }
    }

    /// Metadata, summary and verdicts as `#` comment lines, then the row table.
    fn to_csv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let input = serde_json::to_string(&self.input).expect("input is JSON");
        writeln!(out, "# schema_version: {}", self.schema_version).unwrap();
        writeln!(out, "# tool_version: {}", self.tool_version).unwrap();
        writeln!(out, "# command: {}", self.command).unwrap();
        writeln!(out, "# seed: {}", self.seed).unwrap();
        writeln!(out, "# input: {input}").unwrap();
        for (k, v) in &self.summary.0 {
            writeln!(out, "# {k}: {}", plain(v)).unwrap();
        }
        for v in &self.verdicts {
            let tag = if v.passed { "PASS" } else { "FAIL" };
            writeln!(out, "# verdict {}: {tag} ({})", v.name, v.detail).unwrap();
        }
        let cols = self.columns();
        if !cols.is_empty() {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&cols).unwrap();
            for row in &self.rows {
                w.write_record(cols.iter().map(|c| row.get(c).map(plain).unwrap_or_default()))
                    .unwrap();
            }
            w.flush().unwrap();
        }
        out
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
