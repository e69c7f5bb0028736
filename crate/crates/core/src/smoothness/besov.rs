use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use super::{Check, RatePair, Settings, Status};
use crate::error::{Error, Result};
use crate::majorant::{check_omega_q, default_deltas, PosFunc};
use crate::multipliers::{approx_error_norm, MultiplierFamily};
use crate::quad::{self, Mesh, QuadratureSpec};
use crate::radial::{
    fourier_radial_lazy, radial_lp_norm, sphere_area, tail_power, Provenance, RadialPair,
    RadialProfile,
};

/// Largest decade ratio accepted as geometric convergence toward `t = 0`.
const SHRINK_RATIO: f64 = 0.9;
/// Relative size of the extrapolated remainder at which the march stops.
const STOP_TOL: f64 = 1e-10;
/// Agreement of successive decade ratios taken as an exact power law.
const RATIO_AGREEMENT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMode {
    /// `ln 2 · ∫` over all frequencies.
    Single,
    /// `∫_0^∞ (∫_{t<=|ξ|<=2t} ...) dt/t`.
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// A Besov-type integral with its convergence evidence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BesovValue {
    /// Infinite when the integral does not settle.
    pub value: f64,
    pub finite: bool,
    /// Relative size of the last probe step (or extrapolated remainder).
    pub probe_change: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub preconditions: Vec<Check>,
}

impl BesovValue {
    pub(crate) fn finite(value: f64, probe_change: f64) -> Self {
        Self {
            value,
            finite: true,
            probe_change,
            preconditions: Vec::new(),
        }
    }

    pub(crate) fn divergent(probe_change: f64) -> Self {
        Self {
            value: f64::INFINITY,
            finite: false,
            probe_change,
            preconditions: Vec::new(),
        }
    }
}

/// `∫_0^1 f(t) dt`, one decade at a time toward zero.
///
/// Stops when the geometric remainder is negligible or when two successive
/// decade ratios agree (a power law, for which the remainder is exact). A
/// piece that fails to evaluate after the decay has been established ends
/// the march with the extrapolated value.
pub(crate) fn march_to_zero<F>(f: F, quad: &QuadratureSpec, mesh: &Mesh) -> Result<BesovValue>
where
    F: Fn(f64) -> Result<f64>,
{
    let outer = QuadratureSpec {
        nodes_per_decade: 4,
        ..*quad
    };
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut prev_rho: Option<f64> = None;
    let mut rest_change = 1.0;
    let mut rest = 0.0;
    for k in 0..quad.max_decades {
        let hi = 10f64.powi(-(k as i32));
        let piece = match quad::integrate(&f, hi / 10.0, hi, &outer, mesh) {
            Ok(v) => v,
            Err(e)
                if rest_change <= quad.probe_tol
                    && (e.is_divergence() || matches!(e, Error::PanelCap { .. })) =>
            {
                break;
            }
            Err(e) => return Err(e),
        };
        total += piece;
        if total == 0.0 && k > 0 {
            return Ok(BesovValue::finite(0.0, 0.0));
        }
        if let Some(pr) = prev {
            if piece == 0.0 {
                return Ok(BesovValue::finite(total, 0.0));
            }
            let rho = piece / pr;
            if rho > 0.0 && rho < SHRINK_RATIO {
                rest = piece * rho / (1.0 - rho);
                rest_change = rest / (total + rest);
                let power_law = prev_rho.is_some_and(|r| (rho - r).abs() <= RATIO_AGREEMENT * rho);
                if rest_change <= STOP_TOL || power_law {
                    return Ok(BesovValue::finite(total + rest, rest_change));
                }
            } else {
                rest = 0.0;
                rest_change = 1.0;
            }
            prev_rho = Some(rho);
        }
        prev = Some(piece);
    }
    if rest_change <= quad.probe_tol {
        Ok(BesovValue::finite(total + rest, rest_change))
    } else {
        Ok(BesovValue::divergent(rest_change))
    }
}

pub(crate) fn omega_q_check(
    phi: &PosFunc,
    beta: f64,
    q: f64,
    quad: &QuadratureSpec,
) -> Result<Check> {
    let name = format!("φ in Ω_{beta}^{q}");
    match check_omega_q(phi, beta, q, &default_deltas(), quad) {
        Ok(r) => Ok(Check::new(
            &name,
            r.pass,
            format!(
                "increment ratio sup {:e}, integral {:e}",
                r.ratio_sup,
                r.estimate.unwrap_or(f64::NAN)
            ),
        )),
        Err(Error::Precondition { clause }) => Ok(Check::new(&name, false, clause)),
        Err(e) => Err(e),
    }
}

/// `∫_0^1 (‖T_t f - f‖_p / φ(t))^q dt/t`, or `sup_t ‖T_t f - f‖_p / φ(t)`
/// over `t_grid` when `q = ∞`.
///
/// The lower endpoint is pushed toward zero decade by decade until the
/// geometric remainder is negligible. Requires `φ ∈ Ω_{2β}^q` with `β` the
/// family's order.
pub fn besov_functional(
    fam: &MultiplierFamily,
    pair: &RadialPair,
    p: f64,
    q: f64,
    phi: &PosFunc,
    t_grid: &[f64],
    settings: &Settings,
) -> Result<BesovValue> {
    if !(q >= 1.0) {
        return Err(Error::param("q", "must lie in [1, ∞]"));
    }
    let quad = &settings.quad;
    let beta = fam.gamma;
    let checks = if q.is_infinite() {
        vec![super::omega_check(phi, 2.0 * beta, quad)?]
    } else {
        vec![omega_q_check(phi, 2.0 * beta, q, quad)?]
    };
    settings.gate(&checks)?;
    let ratio = |t: f64| -> Result<f64> {
        let e = approx_error_norm(fam, t, pair, p, quad)?;
        Ok(if e == 0.0 { 0.0 } else { e / phi.eval(t)? })
    };
    let mut out = if pair.is_zero() {
        BesovValue::finite(0.0, 0.0)
    } else if q.is_infinite() {
        super::validate_t_grid(t_grid)?;
        let mut sup: f64 = 0.0;
        for &t in t_grid {
            sup = sup.max(ratio(t)?);
        }
        BesovValue::finite(sup, 0.0)
    } else {
        march_to_zero(|t| Ok(ratio(t)?.powf(q) / t), quad, &Mesh::default())?
    };
    out.preconditions = checks;
    Ok(out)
}

/// `‖f‖_p` with the `p = 2` norm taken on the Fourier side.
fn lp_norm(pair: &RadialPair, p: f64, quad: &QuadratureSpec) -> Result<f64> {
    if p == 2.0 {
        let scale = (2.0 * PI).powf(-f64::from(pair.d) / 2.0);
        Ok(scale * radial_lp_norm(&pair.fourier, 2.0, quad)?)
    } else {
        radial_lp_norm(&pair.space, p, quad)
    }
}

/// `(‖f‖_p^q + B(f))^{1/q}`, or `‖f‖_p + sup` for `q = ∞`.
pub fn besov_norm(
    fam: &MultiplierFamily,
    pair: &RadialPair,
    p: f64,
    q: f64,
    phi: &PosFunc,
    t_grid: &[f64],
    settings: &Settings,
) -> Result<BesovValue> {
    let mut b = besov_functional(fam, pair, p, q, phi, t_grid, settings)?;
    let norm = lp_norm(pair, p, &settings.quad)?;
    b.value = if q.is_infinite() {
        norm + b.value
    } else {
        (norm.powf(q) + b.value).powf(1.0 / q)
    };
    Ok(b)
}

/// `∫_0^∞ ∫_{t<=|ξ|<=2t} (|ξ|^w |F(ξ)| / φ(1/|ξ|))^q dξ dt/t`.
///
/// `Single` uses Fubini (`∫ 1[t<=|ξ|<=2t] dt/t = ln 2`); `Double` integrates
/// the shells and then over `t`.
pub fn besov_spectral_functional(
    f: &RadialProfile,
    rate: &RatePair,
    phi: &PosFunc,
    mode: SpectralMode,
    settings: &Settings,
) -> Result<BesovValue> {
    if f.d != rate.d {
        return Err(Error::param("d", "profile and rates disagree on dimension"));
    }
    if f.shape.is_zero() {
        return Ok(BesovValue::finite(0.0, 0.0));
    }
    let quad = &settings.quad;
    let (w, q) = (rate.weight(), rate.q);
    let sigma = sphere_area(f.d);
    let dm1 = (f.d - 1) as i32;
    let g = |s: f64| -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        let v = f.shape.eval(s)?.abs();
        if v == 0.0 {
            return Ok(0.0);
        }
        Ok(sigma * s.powi(dm1) * (s.powf(w) * v / phi.eval(1.0 / s)?).powf(q))
    };
    let inner_mesh = Mesh::new(f.shape.breaks(), f.shape.cap());
    let result = match mode {
        SpectralMode::Single => quad::integrate_to_infinity(
            g,
            0.0,
            quad.r_max,
            quad,
            &inner_mesh,
            "spectral Besov integral",
        )
        .map(|t| (LN_2 * t.value, t.rel_change)),
        SpectralMode::Double => {
            let mut breaks = f.shape.breaks();
            breaks.extend(f.shape.breaks().iter().map(|b| b / 2.0));
            let outer_mesh = Mesh::new(breaks, Default::default());
            let shell = |t: f64| -> Result<f64> {
                Ok(quad::integrate(g, t, 2.0 * t, quad, &inner_mesh)? / t)
            };
            quad::integrate_to_infinity(
                shell,
                0.0,
                quad.r_max,
                quad,
                &outer_mesh,
                "spectral Besov integral",
            )
            .map(|t| (t.value, t.rel_change))
        }
    };
    match result {
        Ok((v, change)) => Ok(BesovValue::finite(v, change)),
        Err(e) if e.is_divergence() => Ok(BesovValue::divergent(1.0)),
        Err(e) => Err(e),
    }
}

/// What the Besov implication starts from.
#[derive(Debug, Clone, Copy)]
pub enum BesovInput<'a> {
    Pair(&'a RadialPair),
    Spectrum(&'a RadialProfile),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BesovImplication {
    pub direction: Direction,
    pub hypothesis: BesovValue,
    pub conclusion: Option<BesovValue>,
    /// Conclusion value over hypothesis value.
    pub chain_constant: Option<f64>,
    pub preconditions: Vec<Check>,
    pub status: Status,
}

/// Besov smoothness `⇒` finite spectral functional (forward), or the
/// converse (backward).
pub fn theorem_besov(
    fam: &MultiplierFamily,
    input: BesovInput<'_>,
    rate: &RatePair,
    phi: &PosFunc,
    direction: Direction,
    settings: &Settings,
) -> Result<BesovImplication> {
    let quad = &settings.quad;
    let mut checks = Vec::new();
    let (hypothesis, conclusion) = match direction {
        Direction::Forward => {
            let pair = match input {
                BesovInput::Pair(p) => p,
                BesovInput::Spectrum(_) => {
                    return Err(Error::param("input", "the forward direction needs a pair"))
                }
            };
            checks.push(Check::new(
                "forward range 1 < p <= 2, p <= q <= p'",
                rate.forward_ok(),
                format!("p = {}, q = {}", rate.p, rate.q),
            ));
            settings.gate(&checks)?;
            let hyp = besov_functional(fam, pair, rate.p, rate.q, phi, &[], settings)?;
            checks.extend(hyp.preconditions.iter().cloned());
            let concl = if hyp.finite {
                Some(besov_spectral_functional(
                    &pair.fourier,
                    rate,
                    phi,
                    SpectralMode::Single,
                    settings,
                )?)
            } else {
                None
            };
            (hyp, concl)
        }
        Direction::Backward => {
            let f = match input {
                BesovInput::Pair(p) => &p.fourier,
                BesovInput::Spectrum(f) => f,
            };
            let norm = match tail_power(f, 0.0, rate.weight(), rate.q, quad) {
                Ok(t) => Some(t.value),
                Err(e) if e.is_divergence() => None,
                Err(e) => return Err(e),
            };
            checks.push(Check::new(
                "backward range 2 <= p, p' <= q <= p",
                rate.backward_ok(),
                format!("p = {}, q = {}", rate.p, rate.q),
            ));
            checks.push(Check::new(
                "finite weighted spectral norm",
                norm.is_some(),
                norm.map_or("diverges".to_string(), |v| format!("{v:e}")),
            ));
            settings.gate(&checks)?;
            let hyp = besov_spectral_functional(f, rate, phi, SpectralMode::Single, settings)?;
            let concl = if hyp.finite {
                let pair = RadialPair::new(
                    fourier_radial_lazy(f, quad),
                    f.clone(),
                    Provenance::Computed,
                )?;
                let c = besov_functional(fam, &pair, rate.p, rate.q, phi, &[], settings)?;
                checks.extend(c.preconditions.iter().cloned());
                Some(c)
            } else {
                None
            };
            (hyp, concl)
        }
    };
    let status = match &conclusion {
        None => Status::Vacuous,
        Some(c) if c.finite => Status::Holds,
        Some(_) => Status::Violated,
    };
    let chain_constant = conclusion
        .as_ref()
        .and_then(|c| (c.finite && hypothesis.value > 0.0).then(|| c.value / hypothesis.value));
    Ok(BesovImplication {
        direction,
        hypothesis,
        conclusion,
        chain_constant,
        preconditions: checks,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{Shape, Side};
    use approx::assert_relative_eq;

    fn gaussian_pair(d: u32) -> RadialPair {
        let space = RadialProfile::new(
            d,
            Side::Space,
            Shape::Gaussian {
                amp: 1.0,
                rate: 0.5,
            },
        )
        .unwrap();
        let amp = (2.0 * PI).powf(f64::from(d) / 2.0);
        let fourier =
            RadialProfile::new(d, Side::Fourier, Shape::Gaussian { amp, rate: 0.5 }).unwrap();
        RadialPair::new(space, fourier, Provenance::ClosedForm("gaussian".into())).unwrap()
    }

    fn power_tail(d: u32, exponent: f64) -> RadialProfile {
        RadialProfile::new(
            d,
            Side::Fourier,
            Shape::PowerTail {
                amp: 1.0,
                exponent,
                start: 1.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn exact_spectral_value() {
        let s = Settings::default();
        let rate = RatePair::new(2.0, 2.0, 1).unwrap();
        let phi = PosFunc::power(0.4);
        let single =
            besov_spectral_functional(&power_tail(1, 1.0), &rate, &phi, SpectralMode::Single, &s)
                .unwrap();
        // ln 2 · 2 ∫_1^∞ s^{-1.2} ds = 10 ln 2.
        assert_relative_eq!(single.value, 10.0 * LN_2, max_relative = 1e-6);
        let double =
            besov_spectral_functional(&power_tail(1, 1.0), &rate, &phi, SpectralMode::Double, &s)
                .unwrap();
        assert_relative_eq!(double.value, single.value, max_relative = 5e-3);
    }

    #[test]
    fn spectral_divergence_flagged() {
        let s = Settings::default();
        let rate = RatePair::new(2.0, 2.0, 1).unwrap();
        let v = besov_spectral_functional(
            &power_tail(1, 0.5),
            &rate,
            &PosFunc::power(0.4),
            SpectralMode::Single,
            &s,
        )
        .unwrap();
        assert!(!v.finite && v.value.is_infinite());
    }

    #[test]
    fn functional_against_oracle() {
        // Gauss family on the d = 1 Gaussian, p = q = 2, φ = t^{1/2}:
        // E(t)² = ∫ (1 - e^{-t²ξ²})² e^{-ξ²} dξ, so B = ∫_0^1 E(t)² t^{-2} dt.
        let s = Settings::default();
        let pair = gaussian_pair(1);
        let fam = MultiplierFamily::gauss();
        let b = besov_functional(&fam, &pair, 2.0, 2.0, &PosFunc::power(0.5), &[], &s).unwrap();
        assert!(b.finite);
        // Oracle: E(t)² = √π (1 - 2/√(1+t²) + 1/√(1+2t²)), midpoint rule in t.
        let sp = PI.sqrt();
        let n = 200_000;
        let mut acc = 0.0;
        for k in 0..n {
            let t = (k as f64 + 0.5) / n as f64;
            let e2 = sp * (1.0 - 2.0 / (1.0 + t * t).sqrt() + 1.0 / (1.0 + 2.0 * t * t).sqrt());
            acc += e2 / (t * t) / n as f64;
        }
        assert_relative_eq!(b.value, acc, max_relative = 1e-7);
        let norm = besov_norm(&fam, &pair, 2.0, 2.0, &PosFunc::power(0.5), &[], &s).unwrap();
        assert_relative_eq!(norm.value, (sp + acc).sqrt(), max_relative = 1e-7);
    }

    #[test]
    fn precondition_and_zero() {
        let s = Settings::default();
        let pair = gaussian_pair(1);
        let e = besov_functional(
            &MultiplierFamily::gauss(),
            &pair,
            2.0,
            2.0,
            &PosFunc::power(2.0),
            &[],
            &s,
        );
        assert!(matches!(e, Err(Error::Precondition { .. })));
        let z = RadialPair::new(
            RadialProfile::zero(1, Side::Space).unwrap(),
            RadialProfile::zero(1, Side::Fourier).unwrap(),
            Provenance::Computed,
        )
        .unwrap();
        let v = besov_functional(
            &MultiplierFamily::gauss(),
            &z,
            2.0,
            2.0,
            &PosFunc::power(0.5),
            &[],
            &s,
        )
        .unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn sup_form() {
        let s = Settings::default();
        let pair = gaussian_pair(1);
        let grid = crate::quad::log_grid(1e-3, 1.0, 4);
        let v = besov_functional(
            &MultiplierFamily::gauss(),
            &pair,
            2.0,
            f64::INFINITY,
            &PosFunc::power(0.5),
            &grid,
            &s,
        )
        .unwrap();
        let e1 = approx_error_norm(&MultiplierFamily::gauss(), 1.0, &pair, 2.0, &s.quad).unwrap();
        assert_relative_eq!(v.value, e1, max_relative = 1e-12);
    }

    #[test]
    fn gaussian_both_directions() {
        let s = Settings::default();
        let pair = gaussian_pair(1);
        let rate = RatePair::new(2.0, 2.0, 1).unwrap();
        let phi = PosFunc::power(0.5);
        let fam = MultiplierFamily::gauss();
        let fwd = theorem_besov(
            &fam,
            BesovInput::Pair(&pair),
            &rate,
            &phi,
            Direction::Forward,
            &s,
        )
        .unwrap();
        assert_eq!(fwd.status, Status::Holds);
        let bwd = theorem_besov(
            &fam,
            BesovInput::Spectrum(&pair.fourier),
            &rate,
            &phi,
            Direction::Backward,
            &s,
        )
        .unwrap();
        assert_eq!(bwd.status, Status::Holds);
        assert!(fwd.chain_constant.unwrap().is_finite());
    }
}
