//! Radial transform pairs and spectral profiles used as fixtures and oracles.
//!
//! Space sides are closed forms where one is known and the lazily evaluated
//! inverse transform otherwise.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::gm::BVProfile;
use crate::quad::QuadratureSpec;
use crate::radial::{
    fourier_radial_lazy, sphere_area, CustomShape, Provenance, RadialPair, RadialProfile, Shape,
    Side,
};

#[derive(Debug, Clone, Serialize)]
pub struct ParamSchema {
    pub name: &'static str,
    pub default: f64,
    pub description: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub d_min: u32,
    pub params: Vec<ParamSchema>,
    /// Space side given in closed form (otherwise computed by inversion).
    pub closed_form: bool,
    /// Spectrum nonnegative, nonincreasing and vanishing at infinity.
    pub monotone_spectrum: bool,
    /// Closed-form relations the test suite evaluates independently.
    pub oracles: Vec<&'static str>,
}

fn param(name: &'static str, default: f64, description: &'static str) -> ParamSchema {
    ParamSchema {
        name,
        default,
        description,
    }
}

/// All entries, in a fixed order.
pub fn list_catalog() -> Vec<CatalogInfo> {
    vec![
        CatalogInfo {
            name: "gaussian",
            description: "e^{-r²/2} ↔ (2π)^{d/2} e^{-s²/2}",
            d_min: 1,
            params: Vec::new(),
            closed_form: true,
            monotone_spectrum: true,
            oracles: vec!["F₀(0) = (2π)^{d/2}", "‖f‖₂² = π^{d/2}"],
        },
        CatalogInfo {
            name: "exponential_spectrum",
            description: "Γ((d+1)/2) π^{-(d+1)/2} (1+r²)^{-(d+1)/2} ↔ e^{-s}",
            d_min: 1,
            params: Vec::new(),
            closed_form: true,
            monotone_spectrum: true,
            oracles: vec!["f₀(0) = Γ((d+1)/2) π^{-(d+1)/2}", "d = 3: f₀(0) = 1/π²"],
        },
        CatalogInfo {
            name: "ball_indicator",
            description: "1[r <= R] ↔ σ_{d-1} R^d / d · j_{d/2}(Rs)",
            d_min: 1,
            params: vec![param("radius", 1.0, "ball radius R > 0")],
            closed_form: true,
            monotone_spectrum: false,
            oracles: vec!["d = 1: F₀(s) = 2 sin(Rs)/s", "F₀(0) = |B_R|"],
        },
        CatalogInfo {
            name: "power_tail",
            description: "F₀(s) = s^{-σ} 1[s >= 1], space side by inversion",
            d_min: 1,
            params: vec![param("sigma", 1.0, "decay exponent σ > 0")],
            closed_form: false,
            monotone_spectrum: true,
            oracles: vec!["∫_a^b s^{-σq+w q+d-1} ds by antiderivative"],
        },
        CatalogInfo {
            name: "remark_counterexample",
            description: "F₀(s) = s^{-(2β + d/p')} 1[s >= 1], space side by inversion",
            d_min: 1,
            params: vec![
                param("beta", 0.5, "smoothness order β > 0"),
                param("p", 2.0, "integrability exponent p >= 2"),
            ],
            closed_form: false,
            monotone_spectrum: true,
            oracles: vec!["d = 1: exponent 2β + 1/p'"],
        },
        CatalogInfo {
            name: "compact_bump",
            description: "F₀(s) = (1 - s²)²₊, space side by inversion",
            d_min: 1,
            params: Vec::new(),
            closed_form: false,
            monotone_spectrum: true,
            oracles: vec!["F₀(0) = 1", "F₀ = 0 for s >= 1"],
        },
    ]
}

fn resolve(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<(CatalogInfo, BTreeMap<String, f64>)> {
    let info = list_catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Unknown {
            kind: "catalog entry".into(),
            name: name.into(),
        })?;
    for key in params.keys() {
        if !info.params.iter().any(|p| p.name == key) {
            return Err(Error::param(key, format!("not a parameter of `{name}`")));
        }
    }
    let mut values: BTreeMap<String, f64> = info
        .params
        .iter()
        .map(|p| (p.name.to_string(), p.default))
        .collect();
    values.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
    Ok((info, values))
}

fn positive(values: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    let v = values[key];
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::param(key, "must be positive and finite"));
    }
    Ok(v)
}

/// Exponent of the counterexample spectrum, `2β + d/p'`.
pub fn counterexample_exponent(beta: f64, p: f64, d: u32) -> f64 {
    2.0 * beta + f64::from(d) * (p - 1.0) / p
}

fn compact_bump() -> Shape {
    Shape::Custom(CustomShape {
        label: "(1-s²)²₊".into(),
        f: Arc::new(|s: f64| if s < 1.0 { (1.0 - s * s).powi(2) } else { 0.0 }),
        derivative: Some(Arc::new(|s: f64| {
            if s < 1.0 {
                -4.0 * s * (1.0 - s * s)
            } else {
                0.0
            }
        })),
        breaks: vec![1.0],
        jumps: Vec::new(),
        cap: Default::default(),
        support: Some(1.0),
    })
}

fn spectrum_shape(name: &str, d: u32, values: &BTreeMap<String, f64>) -> Result<Shape> {
    let dd = f64::from(d);
    Ok(match name {
        "gaussian" => Shape::Gaussian {
            amp: (2.0 * PI).powf(dd / 2.0),
            rate: 0.5,
        },
        "exponential_spectrum" => Shape::Exponential {
            amp: 1.0,
            rate: 1.0,
        },
        "ball_indicator" => {
            let r = positive(values, "radius")?;
            Shape::Bessel {
                amp: sphere_area(d) * r.powf(dd) / dd,
                nu: dd / 2.0,
                scale: r,
            }
        }
        "power_tail" => Shape::PowerTail {
            amp: 1.0,
            exponent: positive(values, "sigma")?,
            start: 1.0,
        },
        "remark_counterexample" => {
            let beta = positive(values, "beta")?;
            let p = values["p"];
            if !(p >= 2.0 && p.is_finite()) {
                return Err(Error::param("p", "must lie in [2, ∞)"));
            }
            Shape::PowerTail {
                amp: 1.0,
                exponent: counterexample_exponent(beta, p, d),
                start: 1.0,
            }
        }
        "compact_bump" => compact_bump(),
        _ => unreachable!("resolved names are registered"),
    })
}

fn space_shape(name: &str, d: u32, values: &BTreeMap<String, f64>) -> Result<Option<Shape>> {
    let dd = f64::from(d);
    Ok(match name {
        "gaussian" => Some(Shape::Gaussian {
            amp: 1.0,
            rate: 0.5,
        }),
        "exponential_spectrum" => {
            let k = (dd + 1.0) / 2.0;
            Some(Shape::PoissonKernel {
                amp: gamma(k) / PI.powf(k),
                power: k,
            })
        }
        "ball_indicator" => Some(Shape::Indicator {
            amp: 1.0,
            radius: positive(values, "radius")?,
        }),
        _ => None,
    })
}

/// The Fourier-side profile of an entry.
pub fn get_spectrum(name: &str, d: u32, params: &BTreeMap<String, f64>) -> Result<RadialProfile> {
    let (info, values) = resolve(name, params)?;
    if d < info.d_min {
        return Err(Error::param(
            "d",
            format!("`{name}` needs d >= {}", info.d_min),
        ));
    }
    Ok(
        RadialProfile::new(d, Side::Fourier, spectrum_shape(name, d, &values)?)?
            .with_provenance(name),
    )
}

/// The spectrum of an entry as a bounded-variation profile.
pub fn get_bv(name: &str, d: u32, params: &BTreeMap<String, f64>) -> Result<BVProfile> {
    Ok(BVProfile::from_profile(&get_spectrum(name, d, params)?))
}

/// A registered pair in `R^d`.
pub fn get_pair(name: &str, d: u32, params: &BTreeMap<String, f64>) -> Result<RadialPair> {
    get_pair_with(name, d, params, &QuadratureSpec::default())
}

/// [`get_pair`] with the quadrature used by inverted space sides.
pub fn get_pair_with(
    name: &str,
    d: u32,
    params: &BTreeMap<String, f64>,
    quad: &QuadratureSpec,
) -> Result<RadialPair> {
    let fourier = get_spectrum(name, d, params)?;
    let (_, values) = resolve(name, params)?;
    match space_shape(name, d, &values)? {
        Some(shape) => {
            let space = RadialProfile::new(d, Side::Space, shape)?.with_provenance(name);
            RadialPair::new(space, fourier, Provenance::ClosedForm(name.into()))
        }
        None => RadialPair::new(
            fourier_radial_lazy(&fourier, quad),
            fourier,
            Provenance::Computed,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::fourier_radial;
    use approx::assert_relative_eq;

    fn none() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn listing_is_deterministic_and_complete() {
        let names: Vec<&str> = list_catalog().iter().map(|e| e.name).collect();
        assert_eq!(
            names,
            list_catalog().iter().map(|e| e.name).collect::<Vec<_>>()
        );
        assert!(names.contains(&"gaussian") && names.contains(&"remark_counterexample"));
        let pt = list_catalog()
            .into_iter()
            .find(|e| e.name == "power_tail")
            .unwrap();
        assert_eq!(pt.params[0].name, "sigma");
    }

    #[test]
    fn spot_values() {
        let g = get_pair("gaussian", 1, &none()).unwrap();
        assert_relative_eq!(
            g.fourier.eval(0.0).unwrap(),
            (2.0 * PI).sqrt(),
            max_relative = 1e-15
        );
        let b = get_pair("ball_indicator", 1, &none()).unwrap();
        assert!(b.fourier.eval(PI).unwrap().abs() < 1e-15);
        for s in [0.3, 1.0, 2.5, 7.0] {
            assert_relative_eq!(
                b.fourier.eval(s).unwrap(),
                2.0 * s.sin() / s,
                max_relative = 1e-12
            );
        }
        let e = get_pair("exponential_spectrum", 3, &none()).unwrap();
        assert_relative_eq!(
            e.space.eval(0.0).unwrap(),
            1.0 / (PI * PI),
            max_relative = 1e-14
        );
        let r = get_spectrum(
            "remark_counterexample",
            1,
            &BTreeMap::from([("beta".into(), 0.5), ("p".into(), 2.0)]),
        )
        .unwrap();
        // 2β + 1/p' = 1.5 in d = 1.
        assert_relative_eq!(r.eval(4.0).unwrap(), 4f64.powf(-1.5), max_relative = 1e-15);
    }

    #[test]
    fn closed_pairs_forward_consistent() {
        let quad = QuadratureSpec::default();
        let grid = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];
        for info in list_catalog().into_iter().filter(|e| e.closed_form) {
            for d in 1..=3 {
                let pair = get_pair(info.name, d, &none()).unwrap();
                let computed = fourier_radial(&pair.space, &grid, &quad).unwrap();
                for &s in &grid {
                    let want = pair.fourier.eval(s).unwrap();
                    let got = computed.eval(s).unwrap();
                    let scale = pair.fourier.eval(0.0).unwrap().abs();
                    assert!(
                        (got - want).abs() <= 1e-5 * want.abs().max(1e-3 * scale),
                        "{} d={d} s={s}: {got} vs {want}",
                        info.name
                    );
                }
            }
        }
    }

    #[test]
    fn unknown_names_and_params() {
        assert!(matches!(
            get_pair("nope", 1, &none()),
            Err(Error::Unknown { .. })
        ));
        let bad = BTreeMap::from([("alpha".to_string(), 1.0)]);
        assert!(get_pair("gaussian", 1, &bad).is_err());
        let neg = BTreeMap::from([("sigma".to_string(), -1.0)]);
        assert!(get_pair("power_tail", 1, &neg).is_err());
    }
}
