use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PosFunc;
use crate::error::{Error, Result};
use crate::quad::{self, log_grid, Mesh, QuadratureSpec};
use crate::report::{BoundReport, Verdict};

/// Default ratio threshold for `≲` claims.
pub const DEFAULT_THRESHOLD: f64 = 1e3;
/// Largest decade ratio accepted for a geometric extrapolation.
const MAX_DECADE_RATIO: f64 = 0.95;
/// Largest successive-increment ratio counted as geometric shrinkage.
const CAUCHY_RATIO: f64 = 0.9;

/// 64 points per decade on `[1e-4, 1]`.
pub fn default_small_grid() -> Vec<f64> {
    log_grid(1e-4, 1.0, 64)
}

/// 64 points per decade on `[1, 1e4]`.
pub fn default_large_grid() -> Vec<f64> {
    log_grid(1.0, 1e4, 64)
}

/// 64 points per decade over four decades, starting at 1 or, for functions
/// defined only beyond some `a > 1`, at `max(a^e, e^e)`.
pub fn large_grid_for(phi: &PosFunc) -> Vec<f64> {
    let (lo, _) = phi.domain();
    let e = std::f64::consts::E;
    let start = if lo < 1.0 {
        1.0
    } else {
        lo.powf(e).max(e.powf(e))
    };
    log_grid(start, start * 1e4, 64)
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::param("grid", "need at least two points"));
    }
    if !(grid[0] > 0.0) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param(
            "grid",
            "must be positive and strictly increasing",
        ));
    }
    Ok(())
}

fn mesh_for(phi: &PosFunc) -> Mesh {
    match phi {
        PosFunc::Sampled(s) => Mesh::new(s.x.clone(), Default::default()),
        _ => Mesh::default(),
    }
}

/// `∫` over each consecutive pair of `edges`, in parallel.
fn pieces<F>(f: F, edges: &[f64], quad: &QuadratureSpec, mesh: &Mesh) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    edges
        .par_windows(2)
        .map(|w| quad::integrate(&f, w[0], w[1], quad, mesh))
        .collect()
}

fn geometric_rest(prev: f64, last: f64) -> Option<f64> {
    if prev <= 0.0 || last <= 0.0 {
        return None;
    }
    let rho = last / prev;
    (rho < MAX_DECADE_RATIO).then(|| last * rho / (1.0 - rho))
}

fn check_monotone(grid: &[f64], vals: &[f64]) -> Result<()> {
    for i in 1..vals.len() {
        if vals[i] < vals[i - 1] * (1.0 - 1e-12) {
            return Err(Error::NotMonotone { at: grid[i] });
        }
    }
    Ok(())
}

/// `∫_0^t φ(u)/u du ≲ φ(t)` on `grid`, plus monotonicity and decay at `0⁺`.
///
/// The integral is truncated at `grid_min / 64`; the missing head is
/// extrapolated from the ratio of the first two decades above the cut, which
/// is exact for power laws.
pub fn check_m(
    phi: &PosFunc,
    grid: &[f64],
    quad: &QuadratureSpec,
    threshold: f64,
) -> Result<BoundReport> {
    validate_grid(grid)?;
    let vals: Vec<f64> = grid.iter().map(|&t| phi.eval(t)).collect::<Result<_>>()?;
    check_monotone(grid, &vals)?;
    let cut = grid[0] / 64.0;
    let f = |u: f64| Ok(phi.eval(u)? / u);
    let mesh = mesh_for(phi);

    let mut edges = vec![cut];
    edges.extend_from_slice(grid);
    let parts = pieces(f, &edges, quad, &mesh)?;
    let mut lhs = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    for p in &parts {
        acc += p;
        lhs.push(acc);
    }

    let last = *grid.last().expect("validated grid");
    let (head, head_ok) = if cut * 100.0 <= last {
        let near = quad::integrate(f, cut, 10.0 * cut, quad, &mesh)?;
        let far = quad::integrate(f, 10.0 * cut, 100.0 * cut, quad, &mesh)?;
        match geometric_rest(far, near) {
            Some(h) => (h, true),
            None => (0.0, near == 0.0),
        }
    } else {
        (0.0, false)
    };
    for v in &mut lhs {
        *v += head;
    }
    if lhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::non_finite("∫ φ(u)/u du", grid[0]));
    }

    let mut report = BoundReport::one_sided(grid.to_vec(), lhs, vals.clone(), threshold)
        .note(format!("integral below {cut:e} extrapolated as {head:e}"));
    if !head_ok {
        report = report.fail(
            Verdict::DivergentTail,
            "∫ φ(u)/u du does not settle geometrically as the lower limit shrinks",
        );
    }
    let (first, top) = (vals[0], *vals.last().expect("validated grid"));
    if first > 0.1 * top * (1.0 + 1e-9) {
        report = report.fail(
            Verdict::Fail,
            format!(
                "decay proxy violated: φ(grid_min) = {first:e} > 0.1 φ(grid_max) = {:e}",
                0.1 * top
            ),
        );
    }
    Ok(report)
}

/// Default truncation of the Ω tail integral, as a multiple of the last grid
/// point.
pub const OMEGA_HORIZON: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaOptions {
    pub threshold: f64,
    /// Upper truncation; defaults to `OMEGA_HORIZON · grid_max`.
    pub t_max: Option<f64>,
    /// Largest relative change allowed under the x10 probe.
    pub probe_tol: f64,
}

impl Default for OmegaOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            t_max: None,
            probe_tol: 1e-2,
        }
    }
}

/// `∫_t^∞ φ(u) u^(-β-1) du ≲ φ(t) t^(-β)` on `grid`.
///
/// The integral runs to `T_max` with a geometric estimate of the rest; the
/// whole computation is repeated at `10 T_max` and a relative change above
/// `probe_tol` marks the tail as divergent.
pub fn check_omega(
    phi: &PosFunc,
    beta: f64,
    grid: &[f64],
    opts: &OmegaOptions,
    quad: &QuadratureSpec,
) -> Result<BoundReport> {
    validate_grid(grid)?;
    if !(beta > 0.0) {
        return Err(Error::param("beta", "must be positive"));
    }
    let last = *grid.last().expect("validated grid");
    let t_max = opts.t_max.unwrap_or(OMEGA_HORIZON * last);
    if !(t_max > last) {
        return Err(Error::param("t_max", "must exceed the grid"));
    }
    let f = |u: f64| Ok(phi.eval(u)? * u.powf(-beta - 1.0));
    let mesh = mesh_for(phi);

    let mut edges = grid.to_vec();
    edges.push(t_max);
    let parts = pieces(f, &edges, quad, &mesh)?;
    let decade = |a: f64, b: f64| quad::integrate(f, a, b, quad, &mesh);
    let p1 = decade(t_max / 100.0, t_max / 10.0)?;
    let p2 = decade(t_max / 10.0, t_max)?;
    let p3 = decade(t_max, 10.0 * t_max)?;
    let rest = geometric_rest(p1, p2).unwrap_or(0.0);
    let rest_probe = p3 + geometric_rest(p2, p3).unwrap_or(0.0);

    let n = grid.len();
    let mut lhs = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        acc += parts[i];
        lhs[i] = acc;
    }
    let mut change: f64 = 0.0;
    for v in &mut lhs {
        let probe = *v + rest_probe;
        *v += rest;
        if probe != 0.0 {
            change = change.max((probe - *v).abs() / probe.abs());
        }
    }
    if lhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::non_finite("∫ φ(u) u^(-β-1) du", grid[0]));
    }
    let rhs: Vec<f64> = grid
        .iter()
        .map(|&t| Ok(phi.eval(t)? * t.powf(-beta)))
        .collect::<Result<_>>()?;
    let mut report = BoundReport::one_sided(grid.to_vec(), lhs, rhs, opts.threshold)
        .with_probe(change, opts.probe_tol);
    if change > opts.probe_tol {
        report = report.note(format!(
            "tail grew by a relative {change:.3e} when T_max went from {t_max:e} to {:e}",
            10.0 * t_max
        ));
    }
    Ok(report)
}

/// `max_{u₁ <= u₂} [φ(u₂)/u₂^(β-ε)] / [φ(u₁)/u₁^(β-ε)]` over `grid`.
pub fn check_almost_decreasing(
    phi: &PosFunc,
    beta: f64,
    eps: f64,
    grid: &[f64],
    threshold: f64,
) -> Result<BoundReport> {
    validate_grid(grid)?;
    if !(eps > 0.0 && eps < beta) {
        return Err(Error::param("epsilon", "must lie in (0, β)"));
    }
    let quotient: Vec<f64> = grid
        .iter()
        .map(|&t| Ok(phi.eval(t)? * t.powf(eps - beta)))
        .collect::<Result<_>>()?;
    let mut running = f64::INFINITY;
    let rhs: Vec<f64> = quotient
        .iter()
        .map(|&q| {
            running = running.min(q);
            running
        })
        .collect();
    Ok(BoundReport::one_sided(
        grid.to_vec(),
        quotient,
        rhs,
        threshold,
    ))
}

/// Outcome of the `Ω_β = Ω'_β` scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub beta: f64,
    pub omega: BoundReport,
    /// `(ε, almost-decreasing constant)` for every ε tried.
    pub scanned: Vec<(f64, f64)>,
    pub epsilon: Option<f64>,
    pub almost_decreasing: Option<BoundReport>,
    /// `(2/ε) · C` for the selected ε.
    pub chain_bound: Option<f64>,
    /// Ω pass ⇒ some ε passes, and the Ω constant is within twice the chain bound.
    pub holds: bool,
}

/// Runs `check_omega` and scans `ε = β/2^k`, `k = 1..=10`, for an
/// almost-decreasing witness on the grid extended to `10 T_max`.
pub fn omega_equivalence(
    phi: &PosFunc,
    beta: f64,
    grid: &[f64],
    opts: &OmegaOptions,
    quad: &QuadratureSpec,
) -> Result<EquivalenceReport> {
    let omega = check_omega(phi, beta, grid, opts, quad)?;
    let last = *grid.last().expect("validated grid");
    let t_max = opts.t_max.unwrap_or(OMEGA_HORIZON * last);
    let wide = log_grid(grid[0], 10.0 * t_max, 64);
    let mut scanned = Vec::new();
    let mut best: Option<(f64, BoundReport, f64)> = None;
    for k in 1..=10 {
        let eps = beta / f64::from(1u32 << k);
        let r = check_almost_decreasing(phi, beta, eps, &wide, opts.threshold)?;
        scanned.push((eps, r.ratio_sup));
        if r.pass {
            let bound = 2.0 / eps * r.ratio_sup;
            if best.as_ref().map_or(true, |b| bound < b.2) {
                best = Some((eps, r, bound));
            }
        }
    }
    let (epsilon, almost_decreasing, chain_bound) = match best {
        Some((e, r, b)) => (Some(e), Some(r), Some(b)),
        None => (None, None, None),
    };
    let holds = match chain_bound {
        Some(b) => !omega.pass || omega.ratio_sup <= 2.0 * b,
        None => !omega.pass,
    };
    Ok(EquivalenceReport {
        beta,
        omega,
        scanned,
        epsilon,
        almost_decreasing,
        chain_bound,
        holds,
    })
}

/// `δ = 10^-k`, `k = 0..=30`.
pub fn default_deltas() -> Vec<f64> {
    (0..=30).map(|k| 10f64.powi(-k)).collect()
}

/// `∫_0^1 dt / (t φ(1/t)^q) < ∞`, decided by geometric shrinkage of the
/// increments `I(δ_{k+1}) - I(δ_k)` along the decreasing `deltas`.
///
/// The report's rows are successive increments; it passes when every ratio of
/// consecutive increments is at most 0.9. The extrapolated integral is
/// returned as the report estimate. Requires `φ ∈ Ω_β` on [`large_grid_for`].
pub fn check_omega_q(
    phi: &PosFunc,
    beta: f64,
    q: f64,
    deltas: &[f64],
    quad: &QuadratureSpec,
) -> Result<BoundReport> {
    if !(q > 0.0) {
        return Err(Error::param("q", "must be positive"));
    }
    if deltas.len() < 4
        || deltas[0] > 1.0
        || deltas.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0))
    {
        return Err(Error::param(
            "deltas",
            "need at least four decreasing values in (0, 1]",
        ));
    }
    let omega = check_omega(
        phi,
        beta,
        &large_grid_for(phi),
        &OmegaOptions::default(),
        quad,
    )?;
    if !omega.pass {
        return Err(Error::precondition(format!(
            "{} is not in Ω_{beta} (ratio_sup {:e}, verdict {:?})",
            phi.label(),
            omega.ratio_sup,
            omega.verdict
        )));
    }
    let f = |t: f64| {
        let v = phi.eval(1.0 / t)?;
        if v == 0.0 {
            return Err(Error::precondition(format!("φ(1/t) vanishes at t = {t}")));
        }
        Ok(1.0 / (t * v.powf(q)))
    };
    let mut edges = vec![1.0];
    edges.extend(deltas.iter().copied().filter(|d| *d < 1.0));
    edges.reverse();
    let mut parts = pieces(f, &edges, quad, &Mesh::default())?;
    parts.reverse();
    let head = if deltas[0] < 1.0 {
        parts.remove(0)
    } else {
        0.0
    };

    let mut total = head;
    let (mut grid, mut lhs, mut rhs) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..parts.len() {
        total += parts[k];
        if k > 0 {
            grid.push(deltas[k + 1]);
            lhs.push(parts[k]);
            rhs.push(parts[k - 1]);
        }
    }
    let n = parts.len();
    let limit = total + geometric_rest(parts[n - 2], parts[n - 1]).unwrap_or(f64::INFINITY);
    Ok(BoundReport::one_sided(grid, lhs, rhs, CAUCHY_RATIO).with_estimate(limit))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RvEstimate {
    pub index: f64,
    /// RMS of `ln(φ(λx)/φ(x)) - α̂ ln λ` over the fitted points.
    pub residual: f64,
}

/// Least-squares fit of `ln(φ(λx)/φ(x)) ≈ α ln λ` over `lambdas` and the
/// largest quarter of `xs`.
pub fn estimate_rv_index(phi: &PosFunc, lambdas: &[f64], xs: &[f64]) -> Result<RvEstimate> {
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0) || *l == 1.0) {
        return Err(Error::param(
            "lambdas",
            "need positive values different from 1",
        ));
    }
    if xs.is_empty() {
        return Err(Error::param("xs", "empty grid"));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    let keep = sorted.len().div_ceil(4);
    let top = &sorted[sorted.len() - keep..];
    let mut rows = Vec::new();
    for &x in top {
        let base = phi.eval(x)?;
        for &l in lambdas {
            let y = (phi.eval(l * x)? / base).ln();
            if !y.is_finite() {
                return Err(Error::non_finite("ln φ(λx)/φ(x)", x));
            }
            rows.push((l.ln(), y));
        }
    }
    let (sxy, sxx) = rows
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x * y, b + x * x));
    let index = sxy / sxx;
    let residual = (rows
        .iter()
        .map(|(x, y)| (y - index * x).powi(2))
        .sum::<f64>()
        / rows.len() as f64)
        .sqrt();
    Ok(RvEstimate { index, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn m_constant_of_powers() {
        for alpha in [0.25, 0.5, 1.0] {
            let r = check_m(
                &PosFunc::power(alpha),
                &default_small_grid(),
                &quad(),
                DEFAULT_THRESHOLD,
            )
            .unwrap();
            assert_relative_eq!(r.ratio_sup, 1.0 / alpha, max_relative = 1e-9);
            assert!(r.pass, "{:?}", r.notes);
        }
    }

    #[test]
    fn m_against_refined_oracle() {
        // Independent oracle: trapezoid in log variable with a fine step.
        let phi = PosFunc::PowerLog { alpha: 0.5 };
        let r = check_m(&phi, &default_small_grid(), &quad(), DEFAULT_THRESHOLD).unwrap();
        let idx = 200;
        let t = r.grid[idx];
        let n = 400_000;
        let (a, b) = (1e-14f64.ln(), t.ln());
        let h = (b - a) / n as f64;
        let mut s = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            s += w * phi.eval((a + h * k as f64).exp()).unwrap();
        }
        assert!(r.pass);
        assert_relative_eq!(r.lhs[idx], s * h, max_relative = 1e-8);
    }

    #[test]
    fn m_rejects_non_monotone_and_flat() {
        let bump = PosFunc::custom("bump", 0.0, f64::INFINITY, |t| (10.0 * t).sin().abs() + t);
        assert!(matches!(
            check_m(&bump, &default_small_grid(), &quad(), DEFAULT_THRESHOLD),
            Err(Error::NotMonotone { .. })
        ));
        let flat = PosFunc::Constant { value: 1.0 };
        let r = check_m(&flat, &default_small_grid(), &quad(), DEFAULT_THRESHOLD).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn omega_constants_of_powers() {
        for (alpha, beta) in [(1.0, 2.0), (0.5, 1.0)] {
            let r = check_omega(
                &PosFunc::power(alpha),
                beta,
                &default_large_grid(),
                &OmegaOptions::default(),
                &quad(),
            )
            .unwrap();
            assert_relative_eq!(r.ratio_sup, 1.0 / (beta - alpha), max_relative = 1e-9);
            assert!(r.pass);
        }
    }

    #[test]
    fn omega_borderline_power_diverges() {
        let r = check_omega(
            &PosFunc::power(2.0),
            2.0,
            &default_large_grid(),
            &OmegaOptions::default(),
            &quad(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::DivergentTail);
        assert!(r.probe_change.unwrap() > 0.05);
    }

    #[test]
    fn omega_loglog_against_refined_oracle() {
        let phi = PosFunc::LogLog { alpha: 0.3 };
        let r = check_omega(
            &phi,
            1.0,
            &default_large_grid(),
            &OmegaOptions::default(),
            &quad(),
        )
        .unwrap();
        assert!(r.pass);
        // ∫_t^∞ with u = e^y, trapezoid up to u = 1e30 plus an explicit power tail.
        let t = 1.0f64;
        let (a, b) = (t.ln(), 1e30f64.ln());
        let n = 600_000;
        let h = (b - a) / n as f64;
        let mut s = 0.0;
        for k in 0..=n {
            let u = (a + h * k as f64).exp();
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            s += w * phi.eval(u).unwrap() * u.powf(-1.0);
        }
        s *= h;
        let tail = phi.eval(1e30).unwrap() * 1e30f64.powf(-1.0) / 0.7;
        assert_relative_eq!(r.lhs[0], s + tail, max_relative = 2e-3);
    }

    #[test]
    fn almost_decreasing_quotients() {
        let grid = default_large_grid();
        let r = check_almost_decreasing(&PosFunc::power(0.5), 1.0, 0.25, &grid, 10.0).unwrap();
        assert_eq!(r.ratio_sup, 1.0);
        let r = check_almost_decreasing(&PosFunc::power(0.75), 1.0, 0.25, &grid, 10.0).unwrap();
        assert_relative_eq!(r.ratio_sup, 1.0, max_relative = 1e-12);
        // quotient t^0.1 grows with the span
        let r = check_almost_decreasing(&PosFunc::power(0.9), 1.0, 0.2, &grid, 10.0).unwrap();
        assert_relative_eq!(r.ratio_sup, 1e4f64.powf(0.1), max_relative = 1e-12);
        let narrow = log_grid(1.0, 10.0, 64);
        let r2 = check_almost_decreasing(&PosFunc::power(0.9), 1.0, 0.2, &narrow, 10.0).unwrap();
        assert!(r2.ratio_sup < r.ratio_sup);
        assert!(check_almost_decreasing(&PosFunc::power(0.9), 1.0, 1.0, &grid, 10.0).is_err());
    }

    #[test]
    fn omega_q_integrals() {
        let deltas: Vec<f64> = (0..=30).map(|k| 10f64.powi(-k)).collect();
        let r = check_omega_q(&PosFunc::power(0.5), 1.0, 2.0, &deltas, &quad()).unwrap();
        assert!(r.pass);
        assert_relative_eq!(r.estimate.unwrap(), 1.0, max_relative = 1e-10);
        let r = check_omega_q(&PosFunc::power(0.25), 1.0, 4.0, &deltas, &quad()).unwrap();
        assert_relative_eq!(r.estimate.unwrap(), 1.0, max_relative = 1e-10);
        let r = check_omega_q(
            &PosFunc::Constant { value: 2.0 },
            1.0,
            1.0,
            &deltas,
            &quad(),
        )
        .unwrap();
        assert!(!r.pass);
        let r = check_omega_q(&PosFunc::LogShift, 1.0, 1.0, &deltas, &quad()).unwrap();
        assert!(!r.pass, "ratios {:?}", r.ratios());
        assert!(matches!(
            check_omega_q(&PosFunc::power(1.0), 1.0, 1.0, &deltas, &quad()),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn rv_index() {
        let xs = log_grid(1.0, 1e6, 8);
        let l = [2.0, 4.0, 10.0];
        let e = estimate_rv_index(&PosFunc::power(0.7), &l, &xs).unwrap();
        assert_relative_eq!(e.index, 0.7, max_relative = 1e-12);
        assert!(e.residual < 1e-12);
        let c = estimate_rv_index(&PosFunc::Constant { value: 3.0 }, &l, &xs).unwrap();
        assert_eq!(c.index, 0.0);
        let phi = PosFunc::PowerLog { alpha: 1.0 };
        let near = estimate_rv_index(&phi, &l, &log_grid(1.0, 1e3, 8)).unwrap();
        let far = estimate_rv_index(&phi, &l, &xs).unwrap();
        assert!((far.index - 1.0).abs() < (near.index - 1.0).abs());
        // direct limit oracle at x = 1e6
        let x = 1e6f64;
        let direct: f64 = l
            .iter()
            .map(|lam| (phi.eval(lam * x).unwrap() / phi.eval(x).unwrap()).ln() / lam.ln())
            .sum::<f64>()
            / 3.0;
        assert!((far.index - direct).abs() < 0.01);
    }
}
