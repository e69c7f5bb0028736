//! Two-column CSV profiles with a JSON sidecar carrying `d`, the side and the
//! provenance.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::profile::{RadialProfile, Samples, Shape, Side};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub d: u32,
    pub side: Side,
    pub provenance: String,
}

/// `profile.csv` → `profile.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_profile(profile: &RadialProfile, grid: &[f64], csv: &Path) -> Result<()> {
    let values = profile.sample(grid)?;
    let mut out = String::from("r,value\n");
    for (r, v) in grid.iter().zip(&values) {
        out.push_str(&format!("{r:e},{v:e}\n"));
    }
    fs::write(csv, out)?;
    let meta = Sidecar {
        d: profile.d,
        side: profile.side,
        provenance: profile.provenance.clone(),
    };
    fs::write(
        sidecar_path(csv),
        serde_json::to_string_pretty(&meta)? + "\n",
    )?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (a, b) = match (cols.next(), cols.next(), cols.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Format(format!(
                    "line {}: expected two columns",
                    lineno + 1
                )))
            }
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                x.push(a);
                y.push(b);
            }
            _ if x.is_empty() && lineno == 0 => continue,
            _ => return Err(Error::Format(format!("line {}: not a number", lineno + 1))),
        }
    }
    Ok((x, y))
}

pub fn read_profile(csv: &Path) -> Result<RadialProfile> {
    let (x, y) = parse_csv(&fs::read_to_string(csv)?)?;
    let meta: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(csv))?)?;
    let p = RadialProfile::new(meta.d, meta.side, Shape::Sampled(Samples::new(x, y)?))?;
    Ok(p.with_provenance(meta.provenance))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let p = RadialProfile::new(
            2,
            Side::Fourier,
            Shape::Exponential {
                amp: 1.0,
                rate: 1.0,
            },
        )
        .unwrap();
        let grid = [0.0, 0.5, 1.0, 2.0, 4.0];
        write_profile(&p, &grid, &path).unwrap();
        let back = read_profile(&path).unwrap();
        assert_eq!(back.d, 2);
        assert_eq!(back.side, Side::Fourier);
        for r in grid {
            assert_eq!(back.eval(r).unwrap(), p.eval(r).unwrap());
        }
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(parse_csv("r,value\n1,2\nx,3\n").is_err());
        assert!(parse_csv("1,2,3\n").is_err());
        assert_eq!(parse_csv("r,value\n1,2\n").unwrap(), (vec![1.0], vec![2.0]));
    }
}
