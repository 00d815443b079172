use std::path::Path;

use serde_json::{Map, Value};

/// Significant digits kept for every non-integer number.
pub const SIG_DIGITS: usize = 12;

/// Rounds to [`SIG_DIGITS`] significant digits and prints in plain decimal.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("valid float");
    if rounded == 0.0 {
        return "0".into();
    }
    format!("{rounded}")
}

/// Replaces every non-integer number by its decimal string.
pub fn stringify_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            Value::String(format_float(n.as_f64().expect("finite JSON number")))
        }
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_floats).collect()),
        Value::Object(o) => Value::Object(
            o.into_iter()
                .map(|(k, v)| (k, stringify_floats(v)))
                .collect(),
        ),
        other => other,
    }
}

pub struct Envelope {
    pub command: String,
    pub config: Value,
    pub tolerances: Value,
}

impl Envelope {
    fn base(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("tool".into(), Value::String("swclab".into()));
        m.insert(
            "version".into(),
            Value::String(env!("CARGO_PKG_VERSION").into()),
        );
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("config".into(), self.config.clone());
        m.insert("tolerances".into(), self.tolerances.clone());
        m
    }

    pub fn success(&self, result: Value) -> Value {
        let mut m = self.base();
        m.insert("result".into(), result);
        stringify_floats(Value::Object(m))
    }

    pub fn failure(&self, kind: &str, message: &str) -> Value {
        let mut m = self.base();
        let mut e = Map::new();
        e.insert("kind".into(), Value::String(kind.into()));
        e.insert("message".into(), Value::String(message.into()));
        m.insert("error".into(), Value::Object(e));
        stringify_floats(Value::Object(m))
    }
}

/// Flattens a result into `(path, value)` rows, with dotted object keys and numeric array indices.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        let join = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(o) => {
                for (k, x) in o {
                    walk(&join(k), x, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&join(&i.to_string()), x, out);
                }
            }
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            Value::Null => out.push((prefix.to_string(), String::new())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", v, &mut out);
    out
}

pub fn write_csv(path: &Path, result: &Value) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let fail = |e: csv::Error| format!("{}: {e}", path.display());
    w.write_record(["path", "value"]).map_err(fail)?;
    for (k, v) in flatten(result) {
        w.write_record([k, v]).map_err(fail)?;
    }
    w.flush().map_err(|e| format!("{}: {e}", path.display()))
}
