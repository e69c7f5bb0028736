//! Dilation-generated multiplier families `T_t`, `(T_t f)^ = η(t|ξ|) f̂`,
//! their admissibility, and the approximation error `‖T_t f - f‖_p`.

mod spherical;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{log_grid, QuadratureSpec, WidthCap};
use crate::radial::{inverse_norm_probe, radial_lp_norm, Factor, RadialPair, RadialProfile, Side};
use crate::report::BoundReport;

pub use spherical::{
    calibration_constant, combination_weights, gen_binomial, m_r_integral, m_r_series,
    m_r_series_with, spherical_defect, ExponentMode, SeriesValue, Weights, MAX_WEIGHTS,
};

/// Default tolerance for truncating fractional combination weights.
pub const WEIGHT_TOL: f64 = 1e-10;
/// Above this argument the spherical multiplier is summed from its weights.
const SERIES_ABOVE: f64 = 50.0;

#[derive(Clone)]
enum Generator {
    Gauss,
    Poisson,
    Identity,
    Spherical {
        r: f64,
        d: u32,
        weights: Arc<Weights>,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A generator `η` on `[0, ∞)` with its claimed admissibility order `γ`.
#[derive(Clone)]
pub struct MultiplierFamily {
    pub label: String,
    pub gamma: f64,
    pub params: BTreeMap<String, f64>,
    generator: Generator,
}

impl fmt::Debug for MultiplierFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierFamily")
            .field("label", &self.label)
            .field("gamma", &self.gamma)
            .field("params", &self.params)
            .finish()
    }
}

/// `gauss` (`e^{-u²}`, γ = 1), `poisson` (`e^{-u}`, γ = 1/2),
/// `spherical_combination` (`m_r`, γ = r, needs `r` and `d >= 2`) and the
/// degenerate `identity` (`η ≡ 1`).
pub fn builtin_family(name: &str, params: &BTreeMap<String, f64>) -> Result<MultiplierFamily> {
    let (generator, gamma) = match name {
        "gauss" => (Generator::Gauss, 1.0),
        "poisson" => (Generator::Poisson, 0.5),
        "identity" => (Generator::Identity, 1.0),
        "spherical_combination" => {
            let r = *params
                .get("r")
                .ok_or_else(|| Error::param("r", "missing parameter"))?;
            let d = *params
                .get("d")
                .ok_or_else(|| Error::param("d", "missing parameter"))?;
            if d.fract() != 0.0 || d < 2.0 {
                return Err(Error::param(
                    "d",
                    "spherical_combination needs an integer d >= 2",
                ));
            }
            let weights = Arc::new(combination_weights(r, WEIGHT_TOL)?);
            let d = d as u32;
            calibration_constant(d)?;
            (Generator::Spherical { r, d, weights }, r)
        }
        _ => {
            return Err(Error::Unknown {
                kind: "family".into(),
                name: name.into(),
            })
        }
    };
    let gamma = params.get("gamma").copied().unwrap_or(gamma);
    if !(gamma > 0.0) {
        return Err(Error::param("gamma", "must be positive"));
    }
    Ok(MultiplierFamily {
        label: name.to_string(),
        gamma,
        params: params.clone(),
        generator,
    })
}

impl MultiplierFamily {
    pub fn gauss() -> Self {
        builtin_family("gauss", &BTreeMap::new()).expect("builtin")
    }

    pub fn poisson() -> Self {
        builtin_family("poisson", &BTreeMap::new()).expect("builtin")
    }

    pub fn spherical(r: f64, d: u32) -> Result<Self> {
        builtin_family(
            "spherical_combination",
            &BTreeMap::from([("r".to_string(), r), ("d".to_string(), f64::from(d))]),
        )
    }

    pub fn custom(
        label: &str,
        gamma: f64,
        eta: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            gamma,
            params: BTreeMap::new(),
            generator: Generator::Custom(Arc::new(eta)),
        }
    }

    /// Same generator, different claimed order.
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self.params.insert("gamma".into(), gamma);
        self
    }

    /// `1 - η(u)`, computed without cancellation for small `u`.
    pub fn defect(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::param("u", "must be nonnegative"));
        }
        let v = match &self.generator {
            Generator::Gauss => -(-u * u).exp_m1(),
            Generator::Poisson => -(-u).exp_m1(),
            Generator::Identity => 0.0,
            Generator::Spherical { r, d, weights } => {
                if u <= SERIES_ABOVE {
                    spherical_defect(*r, *d, u, ExponentMode::Corrected)?
                } else {
                    1.0 - m_r_series_with(weights, *d, u)?.value
                }
            }
            Generator::Custom(f) => 1.0 - f(u),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::non_finite("multiplier", u))
        }
    }

    pub fn eta(&self, u: f64) -> Result<f64> {
        Ok(1.0 - self.defect(u)?)
    }

    /// Panel-width cap resolving `s ↦ η(t s)`.
    fn cap(&self, t: f64) -> WidthCap {
        match &self.generator {
            Generator::Spherical { r, weights, .. } => {
                let top = (weights.weights.len() as f64).max(r.ceil());
                WidthCap::quarter_period(top * t)
            }
            _ => WidthCap::NONE,
        }
    }

    /// `s ↦ η(t s) - 1` as a profile factor.
    fn error_factor(&self, t: f64) -> Factor {
        let fam = self.clone();
        Factor {
            label: format!("{}(t={t})-1", self.label),
            f: Arc::new(move |s| -fam.defect(t * s).unwrap_or(f64::NAN)),
            cap: self.cap(t),
            breaks: Vec::new(),
        }
    }
}

/// Admissibility data: `|1 - η(u)| / min(1, u)^(2γ)` on a `u` grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub family: String,
    pub gamma: f64,
    #[serde(flatten)]
    pub report: BoundReport,
}

/// Threshold for the two-sided admissibility verdict.
pub const ADMISSIBILITY_THRESHOLD: f64 = 1e3;

/// `log_grid(1e-3, 1e3, 64)`.
pub fn default_admissibility_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 64)
}

/// Two-sided check of `|1 - η(u)| ≍ min(1, u)^(2γ)` over `grid`.
pub fn check_admissible(fam: &MultiplierFamily, grid: &[f64]) -> Result<AdmissibilityReport> {
    let (lo, hi) = match (grid.first(), grid.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::param("grid", "empty")),
    };
    if lo > 1e-3 * (1.0 + 1e-12) || hi < 1e3 * (1.0 - 1e-12) {
        return Err(Error::param("grid", "must span at least [1e-3, 1e3]"));
    }
    use rayon::prelude::*;
    let lhs: Vec<f64> = grid
        .par_iter()
        .map(|&u| fam.defect(u).map(f64::abs))
        .collect::<Result<_>>()?;
    let rhs: Vec<f64> = grid
        .iter()
        .map(|&u| u.min(1.0).powf(2.0 * fam.gamma))
        .collect();
    Ok(AdmissibilityReport {
        family: fam.label.clone(),
        gamma: fam.gamma,
        report: BoundReport::two_sided(grid.to_vec(), lhs, rhs, ADMISSIBILITY_THRESHOLD),
    })
}

/// Fourier-side profile of `T_t f - f`: `(η(ts) - 1) F₀(s)`.
pub fn error_spectrum(fam: &MultiplierFamily, t: f64, pair: &RadialPair) -> RadialProfile {
    RadialProfile {
        d: pair.d,
        side: Side::Fourier,
        shape: pair.fourier.shape.clone().multiplied(fam.error_factor(t)),
        provenance: format!("({} - 1) x {}", fam.label, pair.fourier.provenance),
    }
}

/// `‖T_t f - f‖_p`; Plancherel for `p = 2`, otherwise through the inverse
/// transform of the error spectrum sampled on `[0, r_max]`.
///
/// Off `p = 2` the norm over `[0, r_max / 10]` is compared with the norm over
/// `[0, r_max]`; a relative change above `probe_tol` is reported as divergent.
pub fn approx_error_norm(
    fam: &MultiplierFamily,
    t: f64,
    pair: &RadialPair,
    p: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param("t", "must be positive"));
    }
    if !(p >= 1.0) {
        return Err(Error::param("p", "must lie in [1, ∞]"));
    }
    if pair.is_zero() || matches!(fam.generator, Generator::Identity) {
        return Ok(0.0);
    }
    let spectrum = error_spectrum(fam, t, pair);
    if p == 2.0 {
        let scale = (2.0 * std::f64::consts::PI).powf(-f64::from(pair.d) / 2.0);
        return Ok(scale * radial_lp_norm(&spectrum, 2.0, quad)?);
    }
    space_norm(&spectrum, p, quad)
}

fn space_norm(spectrum: &RadialProfile, p: f64, quad: &QuadratureSpec) -> Result<f64> {
    let probe = inverse_norm_probe(spectrum, p, quad)?;
    if probe.change > quad.probe_tol {
        return Err(Error::Divergent {
            what: format!("space-side L^{p} norm of the approximation error"),
            base: probe.base,
            probe: probe.full,
        });
    }
    Ok(probe.full)
}
