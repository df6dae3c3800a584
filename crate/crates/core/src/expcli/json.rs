//! JSON writer that prints every floating-point value as `{:.16e}`, so
//! artifacts carry 17 significant digits regardless of magnitude.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::Result;

fn escape(s: &str, out: &mut String) {
    // serde_json already knows the escaping rules.
    out.push_str(&serde_json::to_string(s).expect("strings always serialise"));
}

fn number(n: &serde_json::Number, out: &mut String) {
    if n.is_f64() {
        let x = n.as_f64().expect("checked");
        let _ = write!(out, "{x:.16e}");
    } else {
        let _ = write!(out, "{n}");
    }
}

fn emit(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize, out: &mut String| out.extend(std::iter::repeat_n(' ', 2 * n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => number(n, out),
        Value::String(s) => escape(s, out),
        Value::Array(xs) if xs.is_empty() => out.push_str("[]"),
        Value::Array(xs) => {
            // Arrays of scalars stay on one line (matrices, weight vectors).
            if xs.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    emit(x, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in xs.iter().enumerate() {
                pad(indent + 1, out);
                emit(x, indent + 1, out);
                out.push_str(if i + 1 < xs.len() { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                pad(indent + 1, out);
                escape(k, out);
                out.push_str(": ");
                emit(x, indent + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

/// Pretty JSON with full-precision scientific floats. Non-finite floats
/// become `null`, as in serde_json.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    emit(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_in_scientific_form() {
        let xs = [1.0, -0.1, 1e-300, 123456.789, std::f64::consts::PI];
        let s = to_json_string(&serde_json::json!({"x": xs, "n": 3, "ok": true, "s": "a\"b"})).unwrap();
        assert!(s.contains("1.0000000000000000e0"));
        assert!(s.contains("\"n\": 3"));
        let back: Value = serde_json::from_str(&s).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            assert_eq!(back["x"][i].as_f64().unwrap(), x);
        }
        assert_eq!(back["s"], "a\"b");
    }
}
