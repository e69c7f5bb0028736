//! Composite Gauss–Legendre quadrature on log-spaced panels.
//!
//! Panels follow the lattice `10^(k/n)` so that integer powers of ten are
//! always panel boundaries. Panels may be further split by caller breakpoints
//! (jumps, kinks) and by a width cap that keeps oscillatory kernels resolved.
//! Improper integrals are handled by marching outwards one decade at a time
//! (the x10 probe) with geometric extrapolation of the remaining tail.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Linear map of the rule onto `[a, b]`.
    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x)?;
        }
        Ok(acc * half)
    }

    /// Rule applied in `y = ln u` on `[a, b]`, `a > 0`.
    pub fn integrate_log<F>(&self, a: f64, b: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let (la, lb) = (a.ln(), b.ln());
        let half = 0.5 * (lb - la);
        let mid = 0.5 * (la + lb);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let u = (mid + half * x).exp();
            acc += w * u * f(u)?;
        }
        Ok(acc * half)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rule of order `n`.
pub fn rule(n: usize) -> Arc<GaussLegendre> {
    static RULES: OnceLock<RwLock<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = RULES.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(r) = cache.read().expect("rule cache poisoned").get(&n) {
        return r.clone();
    }
    let r = Arc::new(GaussLegendre::new(n));
    cache
        .write()
        .expect("rule cache poisoned")
        .entry(n)
        .or_insert(r)
        .clone()
}

/// Quadrature configuration shared by the radial routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// End of the linear panel `[0, r_min]` and start of the log lattice.
    pub r_min: f64,
    /// First truncation horizon for improper integrals.
    pub r_max: f64,
    /// Log-lattice panel boundaries per decade.
    pub nodes_per_decade: usize,
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Relative change under the x10 probe above which a tail is divergent.
    pub probe_tol: f64,
    /// Relative change at which the outward march stops early.
    pub target_tol: f64,
    pub max_decades: usize,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            r_min: 1e-8,
            r_max: 64.0,
            nodes_per_decade: 32,
            order: 10,
            probe_tol: 1e-2,
            target_tol: 1e-13,
            max_decades: 24,
            max_panels: 4_000_000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::param("quadrature", "need 0 < r_min < r_max < inf"));
        }
        if self.nodes_per_decade < 8 {
            return Err(Error::param("nodes_per_decade", "must be at least 8"));
        }
        if self.order < 2 {
            return Err(Error::param("order", "must be at least 2"));
        }
        Ok(())
    }
}

/// Upper bound on panel width: `min(constant, inv_linear / x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthCap {
    pub constant: f64,
    pub inv_linear: f64,
}

impl Default for WidthCap {
    fn default() -> Self {
        Self::NONE
    }
}

impl WidthCap {
    pub const NONE: WidthCap = WidthCap {
        constant: f64::INFINITY,
        inv_linear: f64::INFINITY,
    };

    pub fn constant(w: f64) -> Self {
        Self {
            constant: w,
            ..Self::NONE
        }
    }

    /// A quarter period of an oscillation with angular frequency `omega`.
    pub fn quarter_period(omega: f64) -> Self {
        if omega > 0.0 {
            Self::constant(std::f64::consts::FRAC_PI_2 / omega)
        } else {
            Self::NONE
        }
    }

    pub fn min(self, other: WidthCap) -> Self {
        Self {
            constant: self.constant.min(other.constant),
            inv_linear: self.inv_linear.min(other.inv_linear),
        }
    }

    pub fn width_at(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.constant.min(self.inv_linear / x)
        } else {
            self.constant
        }
    }
}

/// Where panels must break and how wide they may be.
#[derive(Debug, Clone, Default)]
pub struct Mesh {
    pub breaks: Vec<f64>,
    pub cap: WidthCap,
}

impl Mesh {
    pub fn new(breaks: Vec<f64>, cap: WidthCap) -> Self {
        Self { breaks, cap }
    }

    pub fn with_breaks(mut self, extra: &[f64]) -> Self {
        self.breaks.extend_from_slice(extra);
        self
    }

    pub fn with_cap(mut self, cap: WidthCap) -> Self {
        self.cap = self.cap.min(cap);
        self
    }
}

/// Panel boundaries covering `[a, b]`.
pub fn panel_edges(a: f64, b: f64, spec: &QuadratureSpec, mesh: &Mesh) -> Result<Vec<f64>> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::param("interval", format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(vec![a]);
    }
    let mut pts = vec![a, b];
    let lattice_start = if a > 0.0 { a } else { spec.r_min.min(b) };
    if a == 0.0 && spec.r_min < b {
        pts.push(spec.r_min);
    }
    let n = spec.nodes_per_decade as f64;
    let k0 = (lattice_start.log10() * n).floor() as i64;
    let k1 = (b.log10() * n).ceil() as i64;
    for k in k0..=k1 {
        let x = 10f64.powf(k as f64 / n);
        if x > a && x < b {
            pts.push(x);
        }
    }
    for &x in &mesh.breaks {
        if x > a && x < b {
            pts.push(x);
        }
    }
    pts.sort_by(|x, y| x.partial_cmp(y).expect("finite edges"));
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs().max(1e-300));

    let mut edges = Vec::with_capacity(pts.len());
    edges.push(pts[0]);
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let cap = mesh.cap.width_at(lo).min(mesh.cap.width_at(hi));
        let pieces = if cap.is_finite() && cap > 0.0 {
            ((hi - lo) / cap).ceil().max(1.0)
        } else {
            1.0
        };
        if pieces as usize + edges.len() > spec.max_panels {
            return Err(Error::PanelCap {
                a,
                b,
                cap: spec.max_panels,
            });
        }
        let pieces = pieces as usize;
        for j in 1..pieces {
            edges.push(lo + (hi - lo) * j as f64 / pieces as f64);
        }
        edges.push(hi);
    }
    Ok(edges)
}

/// Contribution of each panel of `[a, b]`.
pub fn panel_values<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec, mesh: &Mesh) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let edges = panel_edges(a, b, spec, mesh)?;
    let gl = rule(spec.order);
    edges
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let v = if lo > 0.0 {
                gl.integrate_log(lo, hi, &f)?
            } else {
                gl.integrate(lo, hi, &f)?
            };
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::non_finite("integrand", lo))
            }
        })
        .collect()
}

/// `∫_a^b f`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec, mesh: &Mesh) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    Ok(sign * panel_values(f, lo, hi, spec, mesh)?.iter().sum::<f64>())
}

/// Result of an improper integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailIntegral {
    /// Best estimate (last probe, including extrapolation).
    pub value: f64,
    /// Estimate one decade earlier.
    pub base: f64,
    /// `|value - base| / |value|` (0 when both vanish).
    pub rel_change: f64,
    /// Final truncation horizon.
    pub horizon: f64,
    /// Whether a geometric tail remainder was added.
    pub extrapolated: bool,
}

fn rel_change(base: f64, probe: f64) -> f64 {
    let d = (probe - base).abs();
    if d == 0.0 {
        0.0
    } else {
        d / probe.abs().max(base.abs())
    }
}

/// Geometric remainder after two consecutive decade pieces.
pub(crate) fn geometric_remainder(prev: f64, last: f64) -> Option<f64> {
    if prev == 0.0 || last == 0.0 || prev.signum() != last.signum() {
        return None;
    }
    let rho = last / prev;
    (rho > 0.0 && rho < 0.95).then(|| last * rho / (1.0 - rho))
}

/// `∫_a^∞ f`, marching one decade at a time from `start` (which must be
/// `> a`, or `a` itself when `a > 0`).
///
/// Stops once two successive estimates agree to `spec.target_tol`; otherwise,
/// after `spec.max_decades` probes, accepts the value when the last probe moved
/// it by at most `spec.probe_tol` and reports [`Error::Divergent`] if not.
pub fn integrate_to_infinity<F>(
    f: F,
    a: f64,
    start: f64,
    spec: &QuadratureSpec,
    mesh: &Mesh,
    what: &str,
) -> Result<TailIntegral>
where
    F: Fn(f64) -> Result<f64>,
{
    march_outward(|x, y| integrate(&f, x, y, spec, mesh), a, start, spec, what)
}

/// [`integrate_to_infinity`] for an arbitrary additive interval function
/// `piece(x, y)`.
pub fn march_outward<P>(
    piece: P,
    a: f64,
    start: f64,
    spec: &QuadratureSpec,
    what: &str,
) -> Result<TailIntegral>
where
    P: Fn(f64, f64) -> Result<f64>,
{
    let mut horizon = start.max(a);
    if horizon <= 0.0 {
        horizon = spec.r_max;
    }
    let mut total = piece(a, horizon)?;
    let mut prev_piece: Option<f64> = None;
    let mut prev_value: Option<f64> = None;
    let mut last = TailIntegral {
        value: total,
        base: total,
        rel_change: f64::INFINITY,
        horizon,
        extrapolated: false,
    };
    for _ in 0..spec.max_decades {
        let next = horizon * 10.0;
        let step = match piece(horizon, next) {
            Ok(v) => v,
            Err(Error::PanelCap { .. }) if prev_value.is_some() => break,
            Err(e) => return Err(e),
        };
        total += step;
        let rem = prev_piece.and_then(|p| geometric_remainder(p, step));
        let value = total + rem.unwrap_or(0.0);
        if let Some(base) = prev_value {
            let change = rel_change(base, value);
            last = TailIntegral {
                value,
                base,
                rel_change: change,
                horizon: next,
                extrapolated: rem.is_some(),
            };
            if change <= spec.target_tol {
                return Ok(last);
            }
        }
        prev_piece = Some(step);
        prev_value = Some(value);
        horizon = next;
    }
    if last.rel_change <= spec.probe_tol {
        Ok(last)
    } else {
        Err(Error::Divergent {
            what: what.to_string(),
            base: last.base,
            probe: last.value,
        })
    }
}

/// `lo · 10^(k / per_decade)` up to `hi` (inclusive, last point pinned to `hi`).
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && per_decade > 0);
    let n = ((hi / lo).log10() * per_decade as f64).round() as usize;
    if n == 0 {
        return vec![lo];
    }
    let step = (hi / lo).ln() / n as f64;
    (0..=n)
        .map(|k| {
            if k == n {
                hi
            } else {
                lo * (step * k as f64).exp()
            }
        })
        .collect()
}

/// `n + 1` equispaced points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n > 0);
    (0..=n)
        .map(|k| {
            if k == n {
                hi
            } else {
                lo + (hi - lo) * k as f64 / n as f64
            }
        })
        .collect()
}
