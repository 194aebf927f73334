//! Report files.
//!
//! A report has six sections: `command`, `argv`, `config`, `channel`,
//! `result` and `diagnostics`. Everything under `result` is a deterministic
//! function of the channel and `config`; run times, evaluation counts and
//! search labels live under `diagnostics`.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Significant digits of every emitted floating-point number.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Round to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Round every non-integer number in a JSON tree.
pub fn round_tree(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_tree),
        Value::Object(map) => map.values_mut().for_each(round_tree),
        _ => {}
    }
}

pub fn to_value<T: Serialize>(t: &T) -> Result<Value, CliError> {
    serde_json::to_value(t).map_err(|e| CliError::Validation(format!("cannot serialize: {e}")))
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    pub argv: Vec<String>,
    pub config: Map<String, Value>,
    pub channel: Value,
    pub result: Map<String, Value>,
    pub diagnostics: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, argv: &[String]) -> Self {
        Self {
            command: command.to_string(),
            argv: argv.to_vec(),
            channel: Value::Null,
            ..Self::default()
        }
    }

    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        root.insert("command".into(), Value::String(self.command.clone()));
        root.insert("argv".into(), self.argv.iter().cloned().map(Value::String).collect());
        root.insert("config".into(), Value::Object(self.config.clone()));
        root.insert("channel".into(), self.channel.clone());
        root.insert("result".into(), Value::Object(self.result.clone()));
        root.insert("diagnostics".into(), Value::Object(self.diagnostics.clone()));
        let mut v = Value::Object(root);
        round_tree(&mut v);
        v
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("a JSON value always serializes");
        s.push('\n');
        s
    }
}
