//! Deterministic JSON rendering and atomic output.

use crate::{Failure, Format, OutputArgs};
use serde::Serialize;
use serde_json::Value;
use std::fmt::Write as _;
use std::io::Write;

pub const SCHEMA: u32 = 1;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => write!(out, "{i}").expect("string write"),
            (_, Some(u), _) => write!(out, "{u}").expect("string write"),
            (_, _, Some(f)) => out.push_str(&fmt_f64(f)),
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string escapes")),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (k, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                render(x, indent + 1, out);
                out.push_str(if k + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (k, (key, x)) in m.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("string escapes"));
                out.push_str(": ");
                render(x, indent + 1, out);
                out.push_str(if k + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> Result<String, Failure> {
    let v = serde_json::to_value(doc).map_err(|e| Failure::Io(e.to_string()))?;
    let mut s = String::new();
    render(&v, 0, &mut s);
    s.push('\n');
    Ok(s)
}

/// Writes the rendered document; files go through a temporary and a rename.
pub fn emit<T: Serialize>(args: &OutputArgs, doc: &T, text: impl FnOnce() -> String) -> Result<(), Failure> {
    let body = match args.format {
        Format::Json => to_json(doc)?,
        Format::Text => text(),
    };
    match &args.out {
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
        Some(path) => {
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(std::path::Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(body.as_bytes())?;
            tmp.flush()?;
            tmp.persist(path).map_err(|e| Failure::Io(e.to_string()))?;
            Ok(())
        }
    }
}

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (k, c) in r.iter().enumerate() {
            w[k] = w[k].max(c.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        let mut s = cells.iter().enumerate().map(|(k, c)| format!("{c:<width$}", width = w[k])).collect::<Vec<_>>().join("  ");
        s.truncate(s.trim_end().len());
        s + "\n"
    };
    let mut out = line(header.iter().map(|h| h.to_string()).collect());
    for r in rows {
        out += &line(r.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn rendering_is_valid_json() {
        let doc = serde_json::json!({"b": [1, 2.5, null], "a": {"s": "x\"y", "e": []}, "n": f64::NAN});
        let s = to_json(&doc).unwrap();
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"][1], 2.5);
        assert_eq!(back["a"]["s"], "x\"y");
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
    }

    #[test]
    fn aligned_table() {
        let t = table(&["a", "bb"], &[vec!["ccc".into(), "d".into()]]);
        assert_eq!(t, "a    bb\nccc  d\n");
    }
}
