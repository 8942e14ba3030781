//! Aligned plain-text rendering of a JSON report.

use std::fmt::Write as _;

use serde_json::Value;

/// Matrices larger than this in either direction are cut.
const MAX_SHOWN: usize = 8;

pub fn text(v: &Value) -> String {
    let mut out = String::new();
    node(&mut out, "", v, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match n.as_f64() {
            Some(x) if n.is_f64() && x != 0.0 && x.abs() < 1e-4 => format!("{x:.3e}"),
            Some(x) if n.is_f64() => format!("{x:.9}"),
            _ => n.to_string(),
        }),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn numeric_rows(v: &Value) -> Option<Vec<Vec<f64>>> {
    let rows = v.as_array()?;
    if rows.is_empty() {
        return None;
    }
    let out: Option<Vec<Vec<f64>>> = rows
        .iter()
        .map(|r| r.as_array()?.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
        .collect();
    let out = out?;
    let width = out[0].len();
    (width > 0 && out.iter().all(|r| r.len() == width)).then_some(out)
}

fn matrix(out: &mut String, rows: &[Vec<f64>], indent: usize) {
    let (r, c) = (rows.len(), rows[0].len());
    for row in rows.iter().take(MAX_SHOWN) {
        let cells: Vec<String> = row.iter().take(MAX_SHOWN).map(|x| format!("{x:>12.6}")).collect();
        let tail = if c > MAX_SHOWN { " ..." } else { "" };
        let _ = writeln!(out, "{:indent$}{}{tail}", "", cells.join(" "));
    }
    if r > MAX_SHOWN || c > MAX_SHOWN {
        let _ = writeln!(out, "{:indent$}[truncated: {r}x{c} matrix, showing {}x{}]", "", r.min(MAX_SHOWN), c.min(MAX_SHOWN));
    }
}

fn node(out: &mut String, key: &str, v: &Value, indent: usize) {
    let label = if key.is_empty() { String::new() } else { format!("{key}:") };
    if let Some(s) = scalar(v) {
        let _ = writeln!(out, "{:indent$}{label:<24} {s}", "");
        return;
    }
    if let Some(rows) = numeric_rows(v) {
        let _ = writeln!(out, "{:indent$}{label}", "");
        matrix(out, &rows, indent + 2);
        return;
    }
    match v {
        Value::Array(items) => {
            if let Some(cells) = items.iter().map(scalar).collect::<Option<Vec<_>>>() {
                let _ = writeln!(out, "{:indent$}{label:<24} [{}]", "", cells.join(", "));
                return;
            }
            let _ = writeln!(out, "{:indent$}{label}", "");
            for (i, item) in items.iter().enumerate() {
                node(out, &format!("[{i}]"), item, indent + 2);
            }
        }
        Value::Object(map) => {
            let inner = if key.is_empty() {
                indent
            } else {
                let _ = writeln!(out, "{:indent$}{label}", "");
                indent + 2
            };
            for (k, item) in map {
                node(out, k, item, inner);
            }
        }
        _ => unreachable!("scalars handled above"),
    }
}
