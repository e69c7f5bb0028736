use std::collections::BTreeMap;

use serde::Serialize;

use super::PosFunc;
use crate::error::{Error, Result};

/// A named majorant with the parameters it was built from.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogMajorant {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    #[serde(skip)]
    pub func: PosFunc,
    /// Smallest argument from which large-`t` checks should start (the
    /// function is nondecreasing beyond it).
    pub large_t_start: f64,
}

const NAMES: [&str; 6] = [
    "power",
    "power_log",
    "power_log_pow",
    "loglog",
    "exp_log_ratio",
    "iterated_log",
];

/// One entry per family at `α = 0.5`; the iterated-log entry uses
/// `α_1 = α_2 = 0.5`.
pub fn catalog_majorants() -> Vec<CatalogMajorant> {
    NAMES
        .iter()
        .map(|name| {
            let mut params = BTreeMap::from([("alpha".to_string(), 0.5)]);
            if *name == "iterated_log" {
                params.insert("alpha_1".into(), 0.5);
                params.insert("alpha_2".into(), 0.5);
            }
            majorant_by_name(name, &params).expect("catalog entries are valid")
        })
        .collect()
}

fn take(params: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::param(key, "missing parameter"))
}

/// Builds a catalog entry from its name and parameter map.
pub fn majorant_by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<CatalogMajorant> {
    let e = std::f64::consts::E;
    let (func, start) = match name {
        "power" => (
            PosFunc::Power {
                alpha: take(params, "alpha")?,
            },
            1.0,
        ),
        "power_log" => (
            PosFunc::PowerLog {
                alpha: take(params, "alpha")?,
            },
            1.0,
        ),
        "power_log_pow" => (
            PosFunc::PowerLogPow {
                alpha: take(params, "alpha")?,
            },
            1.0,
        ),
        "loglog" => (
            PosFunc::LogLog {
                alpha: take(params, "alpha")?,
            },
            1.0,
        ),
        "exp_log_ratio" => (
            PosFunc::ExpLogRatio {
                alpha: take(params, "alpha")?,
            },
            e.powf(e),
        ),
        "iterated_log" => {
            let alpha = take(params, "alpha")?;
            let mut exponents = Vec::new();
            for i in 1.. {
                match params.get(&format!("alpha_{i}")) {
                    Some(a) if *a > 0.0 && *a < 1.0 => exponents.push(*a),
                    Some(_) => {
                        return Err(Error::param(&format!("alpha_{i}"), "must lie in (0, 1)"))
                    }
                    None => break,
                }
            }
            if exponents.is_empty() {
                return Err(Error::param(
                    "alpha_1",
                    "iterated_log needs at least one exponent",
                ));
            }
            // log_n t is positive beyond the tower of height n-1.
            let tower = (1..exponents.len()).fold(1.0, |acc, _| f64::exp(acc));
            let start = tower.powf(e).max(e.powf(e));
            (PosFunc::IteratedLog { alpha, exponents }, start)
        }
        "constant" => (
            PosFunc::Constant {
                value: take(params, "value")?,
            },
            1.0,
        ),
        "log_shift" => (PosFunc::LogShift, 1.0),
        _ => {
            return Err(Error::Unknown {
                kind: "majorant".into(),
                name: name.into(),
            })
        }
    };
    if let Some(a) = params.get("alpha") {
        if !(a.is_finite() && *a >= 0.0) {
            return Err(Error::param("alpha", "must be finite and nonnegative"));
        }
    }
    Ok(CatalogMajorant {
        name: name.to_string(),
        params: params.clone(),
        func,
        large_t_start: start,
    })
}

/// Parses `name[:p1,p2,...]`, e.g. `power:0.5` or `iterated_log:0.5,0.3,0.7`.
pub fn parse_majorant(spec: &str) -> Result<CatalogMajorant> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let values: Vec<f64> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::param("majorant", format!("`{v}` is not a number")))
            })
            .collect::<Result<_>>()?
    };
    let keys: Vec<String> = match name {
        "constant" => vec!["value".into()],
        "log_shift" => vec![],
        "iterated_log" => std::iter::once("alpha".to_string())
            .chain((1..values.len()).map(|i| format!("alpha_{i}")))
            .collect(),
        _ => vec!["alpha".into()],
    };
    if values.len() != keys.len() {
        return Err(Error::param(
            "majorant",
            format!(
                "`{name}` takes {} parameter(s), got {}",
                keys.len(),
                values.len()
            ),
        ));
    }
    majorant_by_name(name, &keys.into_iter().zip(values).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn entries_evaluate() {
        let cat = catalog_majorants();
        assert_eq!(cat.len(), 6);
        for m in &cat {
            let t = m.large_t_start * 2.0;
            assert!(m.func.eval(t).unwrap() > 0.0, "{}", m.name);
        }
        let p = parse_majorant("power:0.5").unwrap();
        assert_eq!(p.func.eval(9.0).unwrap(), 3.0);
        let e = std::f64::consts::E;
        let pl = parse_majorant("power_log:1").unwrap();
        assert_relative_eq!(
            pl.func.eval(e - 1.0).unwrap(),
            e - 1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_majorant("nope:1"),
            Err(Error::Unknown { .. })
        ));
        assert!(parse_majorant("power").is_err());
        assert!(parse_majorant("power:x").is_err());
        assert!(parse_majorant("iterated_log:0.5,1.5").is_err());
        let it = parse_majorant("iterated_log:0.5,0.3,0.7").unwrap();
        assert_eq!(it.params.len(), 3);
        assert!(it.large_t_start >= e_e());
    }

    fn e_e() -> f64 {
        std::f64::consts::E.powf(std::f64::consts::E)
    }
}
