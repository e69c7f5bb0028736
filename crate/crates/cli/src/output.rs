//! Deterministic JSON reports and CSV ratio tables.

use std::fs;
use std::path::Path;

use fourier_decay::{Error, Result};
use serde_json::{Map, Value};

const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds every float to 12 significant digits. Object keys are already
/// sorted by `serde_json`'s default map.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            let rounded: f64 = format!("{x:.*e}", SIGNIFICANT_DIGITS - 1)
                .parse()
                .unwrap_or(x);
            serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

pub fn render(v: Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(&canonical(v))? + "\n")
}

/// Every object with `grid`, `lhs` and `rhs` arrays, keyed by its dotted path.
pub fn ratio_tables(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    collect(v, String::new(), &mut out);
    out
}

fn collect(v: &Value, path: String, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(o) => {
            if let Some(table) = table(o) {
                out.push((
                    if path.is_empty() {
                        "report".into()
                    } else {
                        path.clone()
                    },
                    table,
                ));
            }
            for (k, child) in o {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                collect(child, p, out);
            }
        }
        Value::Array(a) => {
            for (i, child) in a.iter().enumerate() {
                collect(child, format!("{path}.{i}"), out);
            }
        }
        _ => {}
    }
}

fn table(o: &Map<String, Value>) -> Option<String> {
    let col = |k: &str| o.get(k).and_then(Value::as_array);
    let (t, l, r) = (col("grid")?, col("lhs")?, col("rhs")?);
    let num = |v: &Value| v.as_f64().map_or("nan".to_string(), |x| format!("{x:e}"));
    let mut s = String::from("t,lhs,rhs,ratio\n");
    for ((t, l), r) in t.iter().zip(l).zip(r) {
        let ratio = match (l.as_f64(), r.as_f64()) {
            (Some(a), Some(b)) => format!("{:e}", fourier_decay::report::ratio(a, b)),
            _ => "nan".into(),
        };
        s.push_str(&format!("{},{},{},{ratio}\n", num(t), num(l), num(r)));
    }
    Some(s)
}

pub fn write_tables(dir: &Path, v: &Value) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, csv) in ratio_tables(v) {
        let file = format!("{name}.csv");
        fs::write(dir.join(&file), csv).map_err(|e| Error::Io(format!("{file}: {e}")))?;
        written.push(file);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding_is_stable() {
        let v = canonical(json!({"b": 0.1 + 0.2, "a": [1.0 / 3.0, 2]}));
        assert_eq!(v["b"], json!(0.3));
        assert_eq!(v["a"][0], json!(0.333333333333));
        assert_eq!(v["a"][1], json!(2));
        assert_eq!(canonical(v.clone()), v);
        let text = serde_json::to_string(&v).unwrap();
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
    }

    #[test]
    fn tables_found_by_path() {
        let v = json!({
            "result": {"forward": {"grid": [1.0, 2.0], "lhs": [1.0, 0.0], "rhs": [2.0, 0.0]}},
        });
        let tables = ratio_tables(&v);
        assert_eq!(tables.len(), 1);
        assert_eq!(tables[0].0, "result.forward");
        assert_eq!(
            tables[0].1,
            "t,lhs,rhs,ratio\n1e0,1e0,2e0,5e-1\n2e0,0e0,0e0,0e0\n"
        );
    }
}
