//! Run configuration: a JSON file mirroring the flags, with flags taking
//! precedence.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use fourier_decay::quad::log_grid;
use fourier_decay::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Multiplier family, `name[:key=value,...]` (e.g. `gauss`, `poisson:gamma=0.5`).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,

    /// Catalog entry, `name[:key=value,...]` (e.g. `power_tail:sigma=1`).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,

    /// Sampled profile CSV with a JSON sidecar next to it.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<PathBuf>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,

    /// Majorant, `name[:p1,p2,...]` (e.g. `power:0.5`, `power_log:0.5`).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub majorant: Option<String>,

    /// Test the majorant against `Ω_β` for this `β`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,

    /// General monotone constant (scanned over 1, 2, 4, 8 when absent).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,

    /// `forward` or `backward` (besov run).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,

    /// Log grid `lo:hi:points_per_decade`; the default depends on the command.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,

    /// Ratio threshold for bounded-ratio verdicts.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Directory for CSV ratio tables (and profiles, for `catalog dump`).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    /// Loads `path` and lays `flags` over it.
    pub fn resolve(path: Option<&Path>, flags: &RunConfig) -> Result<RunConfig> {
        let mut merged = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                serde_json::from_str::<Value>(&text)
                    .map_err(|e| Error::Format(format!("{}: {e}", p.display())))?
            }
            None => Value::Object(Default::default()),
        };
        let Value::Object(base) = &mut merged else {
            return Err(Error::Format("config file must hold a JSON object".into()));
        };
        if let Value::Object(over) = serde_json::to_value(flags)? {
            base.extend(over);
        }
        serde_json::from_value(merged).map_err(|e| Error::param("config", e.to_string()))
    }
}

/// Splits `name[:key=value,...]`.
pub fn parse_named(spec: &str, field: &str) -> Result<(String, BTreeMap<String, f64>)> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    if name.is_empty() {
        return Err(Error::param(field, "empty name"));
    }
    let mut params = BTreeMap::new();
    for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::param(field, format!("`{item}` is not key=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::param(field, format!("`{v}` is not a number")))?;
        params.insert(k.trim().to_string(), v);
    }
    Ok((name.to_string(), params))
}

/// Parses `lo:hi:points_per_decade`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::param("grid", format!("`{spec}` is not lo:hi:points_per_decade"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && n > 0) {
        return Err(Error::param(
            "grid",
            "need 0 < lo < hi and a positive density",
        ));
    }
    Ok(log_grid(lo, hi, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_specs() {
        let (n, p) = parse_named("spherical_combination:r=2,d=3", "family").unwrap();
        assert_eq!(n, "spherical_combination");
        assert_eq!(p["r"], 2.0);
        assert_eq!(p["d"], 3.0);
        assert!(parse_named("gauss", "family").unwrap().1.is_empty());
        assert!(parse_named("gauss:gamma", "family").is_err());
        assert!(parse_named(":x=1", "family").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("10:1e5:1").unwrap().len(), 5);
        assert!(parse_grid("1:0.5:4").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"d": 3, "p": 1.5, "majorant": "power:0.5"}"#).unwrap();
        let flags = RunConfig {
            p: Some(2.0),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Some(&path), &flags).unwrap();
        assert_eq!(cfg.d, Some(3));
        assert_eq!(cfg.p, Some(2.0));
        assert_eq!(cfg.majorant.as_deref(), Some("power:0.5"));
    }

    #[test]
    fn unknown_fields_are_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"dimension": 3}"#).unwrap();
        let err = RunConfig::resolve(Some(&path), &RunConfig::default()).unwrap_err();
        assert!(err.to_string().contains("dimension"), "{err}");
    }
}
