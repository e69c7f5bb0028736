use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};

use super::Settings;
use crate::error::{Error, Result};
use crate::majorant::{check_omega, default_large_grid, OmegaOptions, PosFunc};
use crate::quad::{self, Mesh};
use crate::radial::{sphere_area, tail_power, RadialProfile, Shape, Side};
use crate::report::{BoundReport, Verdict};

/// Relative spread allowed in the tail ratio across the schedule.
const STABLE_SPREAD: f64 = 0.01;
/// Relative deviation allowed in the per-decade growth.
const GROWTH_TOL: f64 = 0.02;

/// `R = 10, 100, ..., 1e5`.
pub fn default_schedule() -> Vec<f64> {
    (1..=5).map(|k| 10f64.powi(k)).collect()
}

/// Evidence that the tail condition alone does not give Lipschitz smoothness
/// when `φ ∉ Ω_{2β}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemarkReport {
    pub beta: f64,
    pub p: f64,
    pub conjugate: f64,
    pub d: u32,
    /// `F₀(s) = s^(-exponent)` for `s >= 1`, with `exponent = 2β + d/p'`.
    pub exponent: f64,
    /// Tail `∫_{|ξ|>1/t} |F₀|^{p'}` against `φ(t)^{p'}`, `t = 1/R`.
    pub tail: BoundReport,
    /// `σ_{d-1} / (2βp')`, the exact value of the tail ratio.
    pub expected_ratio: f64,
    pub ratio_spread: f64,
    pub stable: bool,
    /// `(R, ∫_1^R s^{2p'β} F₀(s)^{p'} s^{d-1} ds)` along the radial line.
    pub low_frequency: Vec<(f64, f64)>,
    /// Increase of the low-frequency integral per decade of `R`.
    pub growth_per_decade: Vec<f64>,
    pub growth_matches_ln10: bool,
    /// `φ = t^{2β}` tested against `Ω_{2β}`.
    pub omega: BoundReport,
    pub omega_fails: bool,
    /// All three observations as expected.
    pub reproduced: bool,
}

/// Builds `F₀(s) = s^{-(2β + d/p')} 1[s >= 1]` with `φ(t) = t^{2β}` and
/// records (i) the tail condition, (ii) the unbounded growth of the
/// low-frequency part of the Lipschitz integral and (iii) `φ ∉ Ω_{2β}`.
pub fn counterexample_remark(
    beta: f64,
    p: f64,
    d: u32,
    schedule: &[f64],
    settings: &Settings,
) -> Result<RemarkReport> {
    if !(beta > 0.0) {
        return Err(Error::param("beta", "must be positive"));
    }
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::param("p", "must lie in [2, ∞)"));
    }
    if d == 0 {
        return Err(Error::param("d", "dimension must be at least 1"));
    }
    if schedule.len() < 2 || !(schedule[0] > 1.0) || schedule.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param(
            "schedule",
            "need at least two increasing radii above 1",
        ));
    }
    let quad = &settings.quad;
    let pc = p / (p - 1.0);
    let dd = f64::from(d);
    let exponent = 2.0 * beta + dd / pc;
    let f = RadialProfile::new(
        d,
        Side::Fourier,
        Shape::PowerTail {
            amp: 1.0,
            exponent,
            start: 1.0,
        },
    )?;
    let phi = PosFunc::power(2.0 * beta);

    let mut t_grid: Vec<f64> = schedule.iter().map(|r| 1.0 / r).collect();
    t_grid.reverse();
    let lhs: Vec<f64> = t_grid
        .iter()
        .map(|&t| Ok(tail_power(&f, 1.0 / t, 0.0, pc, quad)?.value))
        .collect::<Result<_>>()?;
    let rhs: Vec<f64> = t_grid
        .iter()
        .map(|&t| Ok(phi.eval(t)?.powf(pc)))
        .collect::<Result<_>>()?;
    let tail = BoundReport::one_sided(t_grid, lhs, rhs, settings.threshold);
    let ratios = tail.ratios();
    let ratio_spread = tail.ratio_sup / tail.ratio_inf - 1.0;

    let dm1 = (d - 1) as i32;
    let integrand = |s: f64| Ok(s.powf(2.0 * pc * beta) * f.shape.eval(s)?.powf(pc) * s.powi(dm1));
    let mut low_frequency = Vec::with_capacity(schedule.len());
    let mut acc = quad::integrate(integrand, 1.0, schedule[0], quad, &Mesh::default())?;
    low_frequency.push((schedule[0], acc));
    for w in schedule.windows(2) {
        acc += quad::integrate(integrand, w[0], w[1], quad, &Mesh::default())?;
        low_frequency.push((w[1], acc));
    }
    let growth_per_decade: Vec<f64> = low_frequency
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 / w[0].0).log10())
        .collect();
    let growth_matches_ln10 = growth_per_decade
        .iter()
        .all(|g| (g / LN_10 - 1.0).abs() <= GROWTH_TOL);

    let omega = check_omega(
        &phi,
        2.0 * beta,
        &default_large_grid(),
        &OmegaOptions::default(),
        quad,
    )?;
    let omega_fails = !omega.pass && omega.verdict == Verdict::DivergentTail;
    let stable = ratio_spread <= STABLE_SPREAD && ratios.iter().all(|r| r.is_finite());
    Ok(RemarkReport {
        beta,
        p,
        conjugate: pc,
        d,
        exponent,
        tail,
        expected_ratio: sphere_area(d) / (2.0 * beta * pc),
        ratio_spread,
        stable,
        low_frequency,
        growth_per_decade,
        growth_matches_ln10,
        omega,
        omega_fails,
        reproduced: stable && growth_matches_ln10 && omega_fails,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_dimensional_instance() {
        let r =
            counterexample_remark(0.5, 2.0, 1, &default_schedule(), &Settings::default()).unwrap();
        assert_relative_eq!(r.exponent, 1.5, max_relative = 1e-15);
        // 2 ∫_{1/t}^∞ s^{-3} ds = t²: ratio exactly 1.
        for q in r.tail.ratios() {
            assert_relative_eq!(q, 1.0, max_relative = 1e-9);
        }
        assert_relative_eq!(r.expected_ratio, 1.0, max_relative = 1e-15);
        for g in &r.growth_per_decade {
            assert_relative_eq!(*g, LN_10, max_relative = 1e-9);
        }
        assert!(r.omega_fails && r.reproduced);
    }

    #[test]
    fn higher_dimension_and_p() {
        let r =
            counterexample_remark(0.25, 3.0, 3, &default_schedule(), &Settings::default()).unwrap();
        assert!(r.reproduced);
        for q in r.tail.ratios() {
            assert_relative_eq!(q, r.expected_ratio, max_relative = 1e-8);
        }
    }

    #[test]
    fn bad_arguments() {
        let s = Settings::default();
        assert!(counterexample_remark(0.5, 1.5, 1, &default_schedule(), &s).is_err());
        assert!(counterexample_remark(0.0, 2.0, 1, &default_schedule(), &s).is_err());
        assert!(counterexample_remark(0.5, 2.0, 1, &[10.0], &s).is_err());
    }
}
