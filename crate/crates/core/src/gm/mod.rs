//! General monotone profiles: `∫_t^∞ |dg| <= C ∫_{t/c}^∞ |g(s)|/s ds`, the
//! dimensional refinement `GM^d`, functions whose radial spectrum is `GM^d`,
//! and the relaxed-hypothesis versions of the smoothness results for them.

mod relaxed;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{
    self, geometric_remainder, linear_grid, log_grid, Mesh, QuadratureSpec, TailIntegral,
};
use crate::radial::{
    fourier_radial_lazy, inverse_norm_probe, tail_power, NormProbe, Provenance, RadialPair,
    RadialProfile, Shape, Side,
};
use crate::report::{ratio, BoundReport, Verdict};
use crate::smoothness::besov::march_to_zero;

pub use relaxed::{
    relaxed_besov, relaxed_lip_titchmarsh, relaxed_two_sided, riemann_lebesgue_bound, Part,
    RelaxedBesovReport, RelaxedLipReport, RiemannLebesgueReport,
};

/// Constants tried by [`gm_scan`].
pub const DEFAULT_C_SCAN: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
/// Largest sup ratio between consecutive decades accepted as vanishing.
pub const VANISHING_RATIO: f64 = 0.5;

/// Relative agreement between refinement levels of an increment sum.
const VARIATION_TOL: f64 = 1e-9;
const BASE_POINTS: usize = 1024;
const MAX_LEVELS: usize = 12;
const SUP_PER_DECADE: usize = 64;

/// `log_grid(1e-2, 1e2, 16)`.
pub fn default_gm_grid() -> Vec<f64> {
    log_grid(1e-2, 1e2, 16)
}

/// A locally bounded-variation profile on `(0, ∞)`.
///
/// Variation is taken from the closed-form derivative and jump list when the
/// shape has them, and from refined increment sums otherwise.
#[derive(Debug, Clone)]
pub struct BVProfile {
    pub label: String,
    pub shape: Shape,
}

impl BVProfile {
    pub fn new(label: impl Into<String>, shape: Shape) -> Self {
        Self {
            label: label.into(),
            shape,
        }
    }

    pub fn from_profile(p: &RadialProfile) -> Self {
        Self::new(p.provenance.clone(), p.shape.clone())
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        self.shape.eval(s)
    }

    pub fn has_derivative(&self) -> bool {
        self.shape.derivative(1.0).is_some()
    }

    fn mesh(&self) -> Mesh {
        let mut breaks = self.shape.breaks();
        breaks.extend(self.shape.jumps().iter().map(|j| j.0));
        Mesh::new(breaks, self.shape.cap())
    }

    /// `∫_(a, b] w(s) |dg(s)|` for finite `b`.
    fn weighted_variation<W>(&self, a: f64, b: f64, w: &W, quad: &QuadratureSpec) -> Result<f64>
    where
        W: Fn(f64) -> f64 + Sync,
    {
        if b <= a {
            return Ok(0.0);
        }
        if self.shape.is_zero() {
            return Ok(0.0);
        }
        if self.has_derivative() {
            let smooth = quad::integrate(
                |s| Ok(w(s) * self.shape.derivative(s).unwrap_or(0.0).abs()),
                a,
                b,
                quad,
                &self.mesh(),
            )?;
            let jumps: f64 = self
                .shape
                .jumps()
                .iter()
                .filter(|(x, _)| *x > a && *x <= b)
                .map(|(x, j)| w(*x) * j.abs())
                .sum();
            Ok(smooth + jumps)
        } else {
            self.increment_sum(a, b, w)
        }
    }

    /// Increment sums on grids doubled until two Richardson-corrected levels
    /// agree.
    fn increment_sum<W>(&self, a: f64, b: f64, w: &W) -> Result<f64>
    where
        W: Fn(f64) -> f64 + Sync,
    {
        let log_spaced = a > 0.0 && b / a > 4.0;
        let mut prev_raw: Option<f64> = None;
        let mut prev_est: Option<f64> = None;
        for level in 0..=MAX_LEVELS {
            let n = BASE_POINTS << level;
            let pts = if log_spaced {
                let step = (b / a).ln() / n as f64;
                (0..=n)
                    .map(|k| {
                        if k == n {
                            b
                        } else {
                            a * (step * k as f64).exp()
                        }
                    })
                    .collect()
            } else {
                linear_grid(a, b, n)
            };
            let vals: Vec<f64> = pts
                .iter()
                .map(|&s| self.shape.eval(s))
                .collect::<Result<_>>()?;
            let raw: f64 = pts
                .windows(2)
                .zip(vals.windows(2))
                .map(|(x, v)| w(0.5 * (x[0] + x[1])) * (v[1] - v[0]).abs())
                .sum();
            let est = prev_raw.map_or(raw, |p| raw + (raw - p) / 3.0);
            if let Some(pe) = prev_est {
                if est == 0.0 && pe == 0.0 {
                    return Ok(0.0);
                }
                if (est - pe).abs() <= VARIATION_TOL * est.abs().max(pe.abs()) {
                    return Ok(est);
                }
            }
            prev_raw = Some(raw);
            prev_est = Some(est);
        }
        Err(Error::Divergent {
            what: format!(
                "variation of {} on [{a:e}, {b:e}] under grid refinement",
                self.label
            ),
            base: prev_raw.unwrap_or(0.0),
            probe: prev_est.unwrap_or(0.0),
        })
    }

    /// `∫_(a, ∞) w(s) |dg(s)|`.
    fn weighted_variation_tail<W>(
        &self,
        a: f64,
        w: &W,
        quad: &QuadratureSpec,
    ) -> Result<TailIntegral>
    where
        W: Fn(f64) -> f64 + Sync,
    {
        let start = if a > 0.0 { a } else { 1.0 };
        let head = self.weighted_variation(a, start, w, quad)?;
        let mut t = quad::march_outward(
            |x, y| self.weighted_variation(x, y, w, quad),
            start,
            start,
            quad,
            "variation tail",
        )?;
        t.value += head;
        t.base += head;
        Ok(t)
    }

    /// Largest `|g|` sampled on `[a, b]`.
    fn sup_abs(&self, a: f64, b: f64) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for s in log_grid(a, b, SUP_PER_DECADE) {
            sup = sup.max(self.shape.eval(s)?.abs());
        }
        for (x, _) in self.shape.jumps() {
            if x >= a && x <= b {
                sup = sup.max(self.shape.eval(x)?.abs());
            }
        }
        Ok(sup)
    }
}

/// `∫_t^T |dg|`, with `T = ∞` allowed.
pub fn variation_tail(g: &BVProfile, t: f64, upper: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(t >= 0.0) || !(upper > t) {
        return Err(Error::param("interval", "need 0 <= t < T"));
    }
    let one = |_: f64| 1.0;
    if upper.is_infinite() {
        Ok(g.weighted_variation_tail(t, &one, quad)?.value)
    } else {
        g.weighted_variation(t, upper, &one, quad)
    }
}

/// Sups of `|g|` on `[X, 10X]`, `[10X, 100X]`, `[100X, 1000X]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingProbe {
    pub start: f64,
    pub sups: Vec<f64>,
    pub ratios: Vec<f64>,
    pub pass: bool,
}

pub fn vanishing_probe(g: &BVProfile, start: f64) -> Result<VanishingProbe> {
    let sups: Vec<f64> = (0..3)
        .map(|k| {
            let lo = start * 10f64.powi(k);
            g.sup_abs(lo, lo * 10.0)
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = sups.windows(2).map(|w| ratio(w[1], w[0])).collect();
    let pass = ratios.iter().all(|r| *r < VANISHING_RATIO);
    Ok(VanishingProbe {
        start,
        sups,
        ratios,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmOptions {
    pub threshold: f64,
    /// Truncation horizon as a multiple of the largest grid point.
    pub horizon_factor: f64,
    pub quad: QuadratureSpec,
}

impl Default for GmOptions {
    fn default() -> Self {
        Self {
            threshold: 10.0,
            horizon_factor: 100.0,
            quad: QuadratureSpec::default(),
        }
    }
}

/// `∫_t^T |dg|` against `∫_{t/c}^T |g(s)|/s ds` over a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmReport {
    pub c: f64,
    pub horizon: f64,
    #[serde(flatten)]
    pub report: BoundReport,
    /// Relative change of the variation side when the horizon grows x10.
    pub lhs_probe: f64,
    /// Same for the weighted integral of `|g|`.
    pub rhs_probe: f64,
    pub vanishing: VanishingProbe,
}

impl GmReport {
    pub fn pass(&self) -> bool {
        self.report.pass
    }
}

/// Suffix sums of `piece` over `edges`, each completed by a geometric
/// estimate of the part beyond the last edge, and the relative change of the
/// smallest sum when that estimate is redone one decade further out.
fn suffix_with_rest<P>(edges: &[f64], piece: P) -> Result<(Vec<f64>, f64)>
where
    P: Fn(f64, f64) -> Result<f64> + Sync,
{
    let soft = |a: f64, b: f64| match piece(a, b) {
        Ok(v) => Ok(v),
        Err(e) if e.is_divergence() || matches!(e, Error::PanelCap { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    };
    let pieces: Vec<f64> = edges
        .par_windows(2)
        .map(|w| soft(w[0], w[1]))
        .collect::<Result<_>>()?;
    let top = *edges.last().expect("nonempty edges");
    let decades: Vec<f64> = [
        (top / 100.0, top / 10.0),
        (top / 10.0, top),
        (top, top * 10.0),
    ]
    .par_iter()
    .map(|&(a, b)| soft(a, b))
    .collect::<Result<_>>()?;
    let rest = geometric_remainder(decades[0], decades[1]).unwrap_or(0.0);
    let probed = decades[2] + geometric_remainder(decades[1], decades[2]).unwrap_or(0.0);
    let mut sums = vec![0.0; edges.len()];
    let mut acc = rest;
    for i in (0..pieces.len()).rev() {
        acc += pieces[i];
        sums[i] = acc;
    }
    sums.pop();
    let smallest = *sums.last().unwrap_or(&0.0) - rest;
    let change = if !(rest.is_finite() && probed.is_finite() && smallest.is_finite()) {
        f64::INFINITY
    } else {
        let (a, b) = (smallest + rest, smallest + probed);
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    };
    Ok((sums, change))
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || !(grid[0] > 0.0) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param(
            "grid",
            "must be positive and strictly increasing",
        ));
    }
    Ok(())
}

/// The general monotone condition at constant `c`.
///
/// A failed vanishing probe or a weighted integral of `|g|` that does not
/// settle makes the report fail; neither is raised as an error.
pub fn check_gm(g: &BVProfile, c: f64, grid: &[f64], opts: &GmOptions) -> Result<GmReport> {
    if !(c >= 1.0 && c.is_finite()) {
        return Err(Error::param("c", "must lie in [1, ∞)"));
    }
    validate_grid(grid)?;
    let quad = &opts.quad;
    let top = grid[grid.len() - 1];
    let horizon = top * opts.horizon_factor;
    let vanishing = vanishing_probe(g, top)?;

    let mut lhs_edges = grid.to_vec();
    lhs_edges.push(horizon);
    let (lhs, lhs_probe) = suffix_with_rest(&lhs_edges, |a, b| {
        g.weighted_variation(a, b, &|_| 1.0, quad)
    })?;

    let mut rhs_edges: Vec<f64> = grid.iter().map(|t| t / c).collect();
    rhs_edges.push(horizon);
    let mesh = g.mesh();
    let (rhs, rhs_probe) = suffix_with_rest(&rhs_edges, |a, b| {
        quad::integrate(|s| Ok(g.eval(s)?.abs() / s), a, b, quad, &mesh)
    })?;

    let mut report = BoundReport::one_sided(grid.to_vec(), lhs, rhs, opts.threshold);
    if !vanishing.pass {
        report = report.fail(
            Verdict::Fail,
            format!(
                "sup |g| does not vanish: decade ratios {:?}",
                vanishing.ratios
            ),
        );
    }
    if rhs_probe > quad.probe_tol {
        report = report.fail(Verdict::DivergentTail, "∫ |g(s)|/s ds does not converge");
    } else {
        report = report.with_probe(lhs_probe, quad.probe_tol);
    }
    Ok(GmReport {
        c,
        horizon,
        report,
        lhs_probe,
        rhs_probe,
        vanishing,
    })
}

/// [`check_gm`] for each `c` in [`DEFAULT_C_SCAN`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmScan {
    pub reports: Vec<GmReport>,
    pub smallest_passing_c: Option<f64>,
}

impl GmScan {
    pub fn pass(&self) -> bool {
        self.smallest_passing_c.is_some()
    }
}

pub fn gm_scan(g: &BVProfile, cs: &[f64], grid: &[f64], opts: &GmOptions) -> Result<GmScan> {
    let reports: Vec<GmReport> = cs
        .iter()
        .map(|&c| check_gm(g, c, grid, opts))
        .collect::<Result<_>>()?;
    let smallest_passing_c = reports
        .iter()
        .filter(|r| r.pass())
        .map(|r| r.c)
        .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.min(c))));
    Ok(GmScan {
        reports,
        smallest_passing_c,
    })
}

/// An integral with its convergence evidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub value: f64,
    pub finite: bool,
    pub probe_change: f64,
}

/// `∫_0^1 s^{d-1}|g|` and `∫_1^∞ s^{(d-1)/2}|dg|` on top of the `GM` scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmDReport {
    pub d: u32,
    pub gm: GmScan,
    pub near_zero: Term,
    pub variation: Term,
    pub pass: bool,
}

pub fn check_gm_d(g: &BVProfile, d: u32, grid: &[f64], opts: &GmOptions) -> Result<GmDReport> {
    if d == 0 {
        return Err(Error::param("d", "dimension must be at least 1"));
    }
    let quad = &opts.quad;
    let gm = gm_scan(g, &DEFAULT_C_SCAN, grid, opts)?;
    let dm1 = (d - 1) as i32;
    let head = march_to_zero(|s| Ok(s.powi(dm1) * g.eval(s)?.abs()), quad, &g.mesh())?;
    let near_zero = Term {
        value: head.value,
        finite: head.finite,
        probe_change: head.probe_change,
    };
    let half = f64::from(d - 1) / 2.0;
    let variation = match g.weighted_variation_tail(1.0, &|s: f64| s.powf(half), quad) {
        Ok(t) => Term {
            value: t.value,
            finite: true,
            probe_change: t.rel_change,
        },
        Err(e) if e.is_divergence() => Term {
            value: f64::INFINITY,
            finite: false,
            probe_change: 1.0,
        },
        Err(e) => return Err(e),
    };
    let pass = gm.pass() && near_zero.finite && variation.finite;
    Ok(GmDReport {
        d,
        gm,
        near_zero,
        variation,
        pass,
    })
}

/// `L^p` norm of the inverse transform of `f`: Plancherel for `p = 2`,
/// [`inverse_norm_probe`] otherwise. A transform that cannot be evaluated
/// (for instance unbounded at the origin) gives an infinite change.
pub(crate) fn lp_probe(f: &RadialProfile, p: f64, quad: &QuadratureSpec) -> Result<NormProbe> {
    let unsettled = NormProbe {
        p,
        base: 0.0,
        full: f64::INFINITY,
        change: f64::INFINITY,
    };
    if p == 2.0 {
        return match tail_power(f, 0.0, 0.0, 2.0, quad) {
            Ok(t) => {
                let full = (2.0 * PI).powf(-f64::from(f.d) / 2.0) * t.value.sqrt();
                Ok(NormProbe {
                    p,
                    base: full,
                    full,
                    change: t.rel_change,
                })
            }
            Err(e) if e.is_divergence() => Ok(unsettled),
            Err(e) => Err(e),
        };
    }
    match inverse_norm_probe(f, p, quad) {
        Ok(n) => Ok(n),
        Err(e) if e.is_divergence() || matches!(e, Error::NonFinite { .. }) => Ok(unsettled),
        Err(e) => Err(e),
    }
}

/// A radial function built from a `GM^d` spectral profile.
#[derive(Debug, Clone, Serialize)]
pub struct GmPair {
    #[serde(skip)]
    pub pair: RadialPair,
    pub label: String,
    pub d: u32,
    pub p: f64,
    pub membership: GmDReport,
    /// `L^p` norm of the constructed function, sampled on two horizons.
    pub lp: NormProbe,
}

/// `f₀(t) = σ_{d-1}/(2π)^d ∫_0^∞ s^{d-1} F₀(s) j_{d/2-1}(ts) ds`, after
/// checking `F₀ ∈ GM^d` and that `f₀` has a settled `L^p` norm.
pub fn build_gm_pair(f0: &BVProfile, d: u32, p: f64, opts: &GmOptions) -> Result<GmPair> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param("p", "must lie in [1, ∞)"));
    }
    let membership = check_gm_d(f0, d, &default_gm_grid(), opts)?;
    if !membership.pass {
        return Err(Error::precondition(format!(
            "{} is not in GM^{d}: GM constant {:?}, near-zero term finite {}, variation term finite {}",
            f0.label, membership.gm.smallest_passing_c, membership.near_zero.finite, membership.variation.finite
        )));
    }
    let quad = &opts.quad;
    let fourier =
        RadialProfile::new(d, Side::Fourier, f0.shape.clone())?.with_provenance(f0.label.clone());
    let space = if f0.shape.is_zero() {
        RadialProfile::zero(d, Side::Space)?
    } else {
        fourier_radial_lazy(&fourier, quad)
    };
    let lp = lp_probe(&fourier, p, quad)?;
    if lp.change > quad.probe_tol {
        return Err(Error::Divergent {
            what: format!("L^{p} norm of the inverse transform of {}", f0.label),
            base: lp.base,
            probe: lp.full,
        });
    }
    let pair = RadialPair::new(space, fourier, Provenance::Computed)?;
    Ok(GmPair {
        pair,
        label: f0.label.clone(),
        d,
        p,
        membership,
        lp,
    })
}
