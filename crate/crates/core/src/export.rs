//! Output formatting shared by every exporter: floats with six decimals,
//! JSON with sorted keys.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        // JSON has no NaN/inf; CSV readers accept these spellings
        x.to_string()
    }
}

pub struct CsvOut<W: Write> {
    inner: csv::Writer<W>,
}

pub fn csv_writer<W: Write>(out: W, header: &[&str]) -> Result<CsvOut<W>> {
    let mut inner = csv::Writer::from_writer(out);
    inner.write_record(header).map_err(csv_err)?;
    Ok(CsvOut { inner })
}

impl<W: Write> CsvOut<W> {
    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(csv_err)
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("csv: {other:?}")),
    }
}

/// Pretty JSON with object keys sorted and every non-integer number
/// printed with six decimals. Identical input gives identical bytes.
pub fn to_json<S: Serialize + ?Sized>(value: &S) -> Result<String> {
    let value = serde_json::to_value(value).map_err(|e| Error::Format(e.to_string()))?;
    let mut out = String::new();
    write_value(&value, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&serde_json::to_string(value).unwrap()),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_float(n.as_f64().unwrap()));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(indent + 1, out);
                write_value(item, indent + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, key) in keys.iter().enumerate() {
                pad(indent + 1, out);
                out.push_str(&serde_json::to_string(key).unwrap());
                out.push_str(": ");
                write_value(&map[*key], indent + 1, out);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

fn pad(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_six_decimals_and_keys_sorted() {
        let text = to_json(&json!({"b": 2.0 / 3.0, "a": [1, 0.5], "c": null})).unwrap();
        assert_eq!(
            text,
            "{\n  \"a\": [\n    1,\n    0.500000\n  ],\n  \"b\": 0.666667,\n  \"c\": null\n}\n"
        );
    }
}
