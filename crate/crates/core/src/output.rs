//! Command output records and their JSON / CSV encodings.
//!
//! Reals are written with 17 significant digits in scientific notation
//! (`{:.16e}`), which round-trips every `f64`. The encoding does not depend on
//! locale: `.` is the decimal separator and `,` the CSV field separator.

use std::fmt::Write as _;

use serde_json::Value as Json;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Bool(bool),
    Str(String),
    Null,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Value::Null, Value::Num)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<Option<bool>> for Value {
    fn from(v: Option<bool>) -> Self {
        v.map_or(Value::Null, Value::Bool)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

/// 17 significant digits, e.g. `3.7500000000000000e-1`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Value {
    fn to_json(&self) -> String {
        match self {
            Value::Num(x) if x.is_finite() => format_real(*x),
            Value::Num(_) | Value::Null => "null".into(),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Str(s) => Json::String(s.clone()).to_string(),
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Value::Num(x) => format_real(*x),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Str(s) => csv_field(s),
            Value::Null => String::new(),
        }
    }

    fn from_json(v: &Json) -> Result<Value> {
        Ok(match v {
            Json::Null => Value::Null,
            Json::Bool(b) => Value::Bool(*b),
            Json::Number(n) => match n.as_u64() {
                Some(i) => Value::Int(i),
                None => Value::Num(n.as_f64().ok_or_else(|| Error::invalid("non-numeric number"))?),
            },
            Json::String(s) => Value::Str(s.clone()),
            _ => return Err(Error::invalid("nested values are not part of the record schema")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// The echo of one command: its name, inputs and outputs, in insertion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputRecord {
    pub command: String,
    pub inputs: Vec<(String, Value)>,
    pub outputs: Vec<(String, Value)>,
}

impl OutputRecord {
    pub fn new(command: &str) -> Self {
        OutputRecord {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.inputs.push((key.to_string(), value.into()));
        self
    }

    pub fn output(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.outputs.push((key.to_string(), value.into()));
        self
    }

    pub fn get_output(&self, key: &str) -> Option<&Value> {
        self.outputs.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Single-line JSON object `{"command":…,"inputs":{…},"outputs":{…}}`.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\"command\":");
        s.push_str(&Value::Str(self.command.clone()).to_json());
        for (name, fields) in [("inputs", &self.inputs), ("outputs", &self.outputs)] {
            let _ = write!(s, ",\"{name}\":{{");
            for (i, (k, v)) in fields.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{}:{}", Json::String(k.clone()), v.to_json());
            }
            s.push('}');
        }
        s.push('}');
        s
    }

    /// Header line and one data line; keys are `command`, then inputs, then outputs.
    pub fn to_csv(&self) -> String {
        let fields = self.inputs.iter().chain(&self.outputs);
        let header: Vec<String> = std::iter::once("command".to_string())
            .chain(fields.clone().map(|(k, _)| csv_field(k)))
            .collect();
        let row: Vec<String> = std::iter::once(csv_field(&self.command))
            .chain(fields.map(|(_, v)| v.to_csv()))
            .collect();
        format!("{}\n{}", header.join(","), row.join(","))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    /// Inverse of [`OutputRecord::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: Json = serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))?;
        let obj = parsed
            .as_object()
            .ok_or_else(|| Error::invalid("record is not a JSON object"))?;
        let command = obj
            .get("command")
            .and_then(Json::as_str)
            .ok_or_else(|| Error::invalid("record has no command"))?
            .to_string();
        let section = |name: &str| -> Result<Vec<(String, Value)>> {
            obj.get(name)
                .and_then(Json::as_object)
                .ok_or_else(|| Error::invalid(format!("record has no {name} object")))?
                .iter()
                .map(|(k, v)| Ok((k.clone(), Value::from_json(v)?)))
                .collect()
        };
        Ok(OutputRecord {
            command,
            inputs: section("inputs")?,
            outputs: section("outputs")?,
        })
    }
}
