//! Deterministic JSON: every float is rounded to 12 significant digits.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Number, Value};

const SIGNIFICANT: usize = 12;

fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT - 1, x).parse().unwrap_or(x)
}

fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round_sig(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = canonical(serde_json::to_value(value)?);
    Ok(serde_json::to_string_pretty(&v)?)
}

/// Writes to `out` when given, to stdout otherwise.
pub fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = to_json(value)?;
    match out {
        Some(p) => {
            std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))
        }
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                // a closed pipe (e.g. `| head`) is not an error of ours
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => Ok(r?),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-2.5e-17), -2.5e-17);
        let s = to_json(&serde_json::json!({"a": [1.0000000000001, 3], "b": f64::NAN})).unwrap();
        assert_eq!(s, "{\n  \"a\": [\n    1.0,\n    3\n  ],\n  \"b\": null\n}");
    }
}
