use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use ftnm_core::{Operator, C64};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::schema::{self, RESERVED_KEYS};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("cannot read `{path}`: {reason}")]
    Io { path: String, reason: String },

    #[error("{0}")]
    Core(#[from] ftnm_core::Error),
}

impl CliError {
    pub fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SpectralWidth,
    Fidelity,
    VerifyBounds,
    SpreadIdentity,
    SparseCheck,
    Propagate,
    Threshold,
    Recursion,
    Level,
    Spinboson,
    Hyperfine,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SpectralWidth => "spectral-width",
            Command::Fidelity => "fidelity",
            Command::VerifyBounds => "verify-bounds",
            Command::SpreadIdentity => "spread-identity",
            Command::SparseCheck => "sparse-check",
            Command::Propagate => "propagate",
            Command::Threshold => "threshold",
            Command::Recursion => "recursion",
            Command::Level => "level",
            Command::Spinboson => "spinboson",
            Command::Hyperfine => "hyperfine",
        }
    }

    pub fn parse(name: &str) -> Option<Command> {
        Command::value_variants().iter().copied().find(|c| c.name() == name)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub parameters: Map<String, Value>,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    /// Directory that relative input paths are resolved against.
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn new(command: Command, parameters: Map<String, Value>) -> Self {
        RunConfig {
            command,
            parameters,
            seed: 0,
            output_path: None,
            format: Format::Csv,
            base_dir: PathBuf::from("."),
        }
    }

    /// Builds a config from a JSON object. `command`, `seed`, `format` and
    /// `output_path` may appear alongside the parameters; `command` overrides
    /// the document's own.
    pub fn from_value(command: Option<Command>, doc: Value) -> Result<Self, CliError> {
        let Value::Object(mut map) = doc else {
            return Err(CliError::field("<root>", "config must be a JSON object"));
        };
        let listed = match map.remove("command") {
            None => None,
            Some(Value::String(s)) => {
                Some(Command::parse(&s).ok_or_else(|| CliError::field("command", format!("unknown command `{s}`")))?)
            }
            Some(_) => return Err(CliError::field("command", "must be a string")),
        };
        let command = match (command, listed) {
            (Some(c), Some(l)) if c != l => {
                return Err(CliError::field(
                    "command",
                    format!("config names `{}` but `{}` was requested", l.name(), c.name()),
                ))
            }
            (Some(c), _) | (None, Some(c)) => c,
            (None, None) => return Err(CliError::field("command", "missing")),
        };
        let mut cfg = RunConfig::new(command, Map::new());
        if let Some(seed) = map.remove("seed") {
            cfg.seed = seed
                .as_u64()
                .ok_or_else(|| CliError::field("seed", "must be a non-negative integer"))?;
        }
        if let Some(f) = map.remove("format") {
            cfg.format = serde_json::from_value(f).map_err(|_| CliError::field("format", "expected csv or json"))?;
        }
        if let Some(p) = map.remove("output_path") {
            let p = p.as_str().ok_or_else(|| CliError::field("output_path", "must be a string"))?;
            cfg.output_path = Some(PathBuf::from(p));
        }
        cfg.parameters = map;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(command: Option<Command>, path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::field("<root>", format!("invalid JSON: {e}")))?;
        let mut cfg = Self::from_value(command, doc)?;
        if let Some(dir) = path.parent() {
            cfg.base_dir = dir.to_path_buf();
        }
        Ok(cfg)
    }

    /// Checks parameter names and required keys against the command schema.
    pub fn validate(&self) -> Result<(), CliError> {
        let spec = schema::spec(self.command);
        for key in self.parameters.keys() {
            if RESERVED_KEYS.contains(&key.as_str()) {
                continue;
            }
            if !spec.params.iter().any(|p| p.name == key) {
                return Err(CliError::field(
                    key.clone(),
                    format!("not a parameter of `{}`", self.command.name()),
                ));
            }
        }
        for p in spec.params.iter().filter(|p| p.required) {
            if !self.parameters.contains_key(p.name) {
                return Err(CliError::field(p.name, "required parameter missing"));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Params<'_> {
        Params { map: &self.parameters }
    }
}

/// Typed access to a parameter map; every error names the offending key.
#[derive(Clone, Copy)]
pub struct Params<'a> {
    map: &'a Map<String, Value>,
}

impl<'a> Params<'a> {
    pub fn from_map(map: &'a Map<String, Value>) -> Self {
        Params { map }
    }

    pub fn has(&self, name: &str) -> bool {
        self.map.get(name).is_some_and(|v| !v.is_null())
    }

    pub fn value(&self, name: &str) -> Option<&'a Value> {
        self.map.get(name).filter(|v| !v.is_null())
    }

    fn required(&self, name: &str) -> Result<&'a Value, CliError> {
        self.value(name)
            .ok_or_else(|| CliError::field(name, "required parameter missing"))
    }

    pub fn f64(&self, name: &str) -> Result<f64, CliError> {
        as_f64(name, self.required(name)?)
    }

    pub fn f64_opt(&self, name: &str) -> Result<Option<f64>, CliError> {
        self.value(name).map(|v| as_f64(name, v)).transpose()
    }

    pub fn f64_or(&self, name: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64_opt(name)?.unwrap_or(default))
    }

    pub fn u64(&self, name: &str) -> Result<u64, CliError> {
        as_u64(name, self.required(name)?)
    }

    pub fn usize(&self, name: &str) -> Result<usize, CliError> {
        Ok(self.u64(name)? as usize)
    }

    pub fn usize_opt(&self, name: &str) -> Result<Option<usize>, CliError> {
        self.value(name).map(|v| as_u64(name, v).map(|x| x as usize)).transpose()
    }

    pub fn usize_or(&self, name: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.usize_opt(name)?.unwrap_or(default))
    }

    pub fn bool_or(&self, name: &str, default: bool) -> Result<bool, CliError> {
        match self.value(name) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| CliError::field(name, "expected a boolean")),
        }
    }

    pub fn string_opt(&self, name: &str) -> Result<Option<&'a str>, CliError> {
        self.value(name)
            .map(|v| v.as_str().ok_or_else(|| CliError::field(name, "expected a string")))
            .transpose()
    }

    fn list(&self, name: &str) -> Result<Option<&'a Vec<Value>>, CliError> {
        self.value(name)
            .map(|v| v.as_array().ok_or_else(|| CliError::field(name, "expected a list")))
            .transpose()
    }

    pub fn f64_list_or(&self, name: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.list(name)? {
            None => Ok(default.to_vec()),
            Some(xs) => xs
                .iter()
                .enumerate()
                .map(|(i, v)| as_f64(&format!("{name}[{i}]"), v))
                .collect(),
        }
    }

    pub fn usize_list_or(&self, name: &str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        match self.list(name)? {
            None => Ok(default.to_vec()),
            Some(xs) => xs
                .iter()
                .enumerate()
                .map(|(i, v)| as_u64(&format!("{name}[{i}]"), v).map(|x| x as usize))
                .collect(),
        }
    }

    /// Accepts a single integer or a list of integers.
    pub fn u64_one_or_many(&self, name: &str) -> Result<Vec<u64>, CliError> {
        let v = self.required(name)?;
        match v {
            Value::Array(xs) if xs.is_empty() => Err(CliError::field(name, "empty list")),
            Value::Array(xs) => xs
                .iter()
                .enumerate()
                .map(|(i, x)| as_u64(&format!("{name}[{i}]"), x))
                .collect(),
            _ => Ok(vec![as_u64(name, v)?]),
        }
    }

    pub fn string_list_or(&self, name: &str, default: &[&str]) -> Result<Vec<String>, CliError> {
        match self.list(name)? {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(xs) => xs
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| CliError::field(format!("{name}[{i}]"), "expected a string"))
                })
                .collect(),
        }
    }

    pub fn object(&self, name: &str) -> Result<Params<'a>, CliError> {
        self.required(name)?
            .as_object()
            .map(Params::from_map)
            .ok_or_else(|| CliError::field(name, "expected an object"))
    }

    pub fn raw(&self, name: &str) -> Result<&'a Value, CliError> {
        self.required(name)
    }

    /// Square matrix given as rows whose entries are numbers or `[re, im]`.
    pub fn matrix(&self, name: &str) -> Result<Operator, CliError> {
        let rows = self
            .required(name)?
            .as_array()
            .ok_or_else(|| CliError::field(name, "expected a list of rows"))?;
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| CliError::field(format!("{name}[{i}]"), "expected a row list"))?;
            if row.len() != dim {
                return Err(CliError::field(
                    format!("{name}[{i}]"),
                    format!("row has {} entries, matrix needs {dim}", row.len()),
                ));
            }
            for (j, x) in row.iter().enumerate() {
                entries.push(complex_entry(&format!("{name}[{i}][{j}]"), x)?);
            }
        }
        Operator::from_row_major(dim, &entries).map_err(|e| CliError::field(name, e.to_string()))
    }
}

fn complex_entry(field: &str, v: &Value) -> Result<C64, CliError> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok(C64::new(as_f64(field, &pair[0])?, as_f64(field, &pair[1])?)),
        Value::Array(_) => Err(CliError::field(field, "complex entries are [re, im]")),
        _ => Ok(C64::new(as_f64(field, v)?, 0.0)),
    }
}

fn as_f64(field: &str, v: &Value) -> Result<f64, CliError> {
    v.as_f64().ok_or_else(|| CliError::field(field, "expected a number"))
}

fn as_u64(field: &str, v: &Value) -> Result<u64, CliError> {
    v.as_u64()
        .ok_or_else(|| CliError::field(field, "expected a non-negative integer"))
}
