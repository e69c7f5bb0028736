use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    omega_check, reciprocal_grid, validate_t_grid, AsymptoticVerdict, Check, ImplicationReport,
    RatePair, Regime, Settings, Status, CHAIN_SLACK,
};
use crate::error::{Error, Result};
use crate::majorant::{check_m, default_small_grid, PosFunc};
use crate::multipliers::{
    approx_error_norm, check_admissible, default_admissibility_grid, MultiplierFamily,
};
use crate::quad::{self, Mesh, QuadratureSpec, WidthCap};
use crate::radial::{
    fourier_radial_lazy, radial_lp_norm, shell_integral, sphere_area, tail_power, Factor,
    Provenance, RadialPair, RadialProfile, Side,
};
use crate::report::{BoundReport, Verdict};

fn eval_phi(phi: &PosFunc, grid: &[f64], map: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    grid.iter().map(|&t| phi.eval(map(t))).collect()
}

fn check_dimension(f: &RadialProfile, rate: &RatePair) -> Result<()> {
    if f.d != rate.d {
        return Err(Error::param(
            "d",
            format!("profile lives in R^{}, rates are for R^{}", f.d, rate.d),
        ));
    }
    if f.side != Side::Fourier {
        return Err(Error::param("side", "expected a Fourier-side profile"));
    }
    Ok(())
}

fn admissibility_check(fam: &MultiplierFamily, beta: f64) -> Result<Check> {
    let adm = check_admissible(fam, &default_admissibility_grid())?;
    let order_ok = (fam.gamma - beta).abs() <= 1e-12 * beta.max(1.0);
    Ok(Check::new(
        &format!("{} admissible of order {beta}", fam.label),
        adm.report.pass && order_ok,
        format!(
            "claimed order {}, ratio range [{:e}, {:e}]",
            fam.gamma, adm.report.ratio_inf, adm.report.ratio_sup
        ),
    ))
}

/// `‖T_t f - f‖_p = O(φ(t))` as `t → 0⁺`, over `t_grid`.
///
/// Checks first that `fam` is admissible of order `β` and that `φ ∈ Ω_{2β}`.
pub fn lip_check(
    fam: &MultiplierFamily,
    pair: &RadialPair,
    p: f64,
    phi: &PosFunc,
    beta: f64,
    t_grid: &[f64],
    settings: &Settings,
) -> Result<AsymptoticVerdict> {
    validate_t_grid(t_grid)?;
    let checks = vec![
        admissibility_check(fam, beta)?,
        omega_check(phi, 2.0 * beta, &settings.quad)?,
    ];
    settings.gate(&checks)?;
    let lhs: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| approx_error_norm(fam, t, pair, p, &settings.quad))
        .collect::<Result<_>>()?;
    let rhs = eval_phi(phi, t_grid, |t| t)?;
    Ok(AsymptoticVerdict {
        regime: Regime::Small,
        report: BoundReport::one_sided(t_grid.to_vec(), lhs, rhs, settings.threshold),
        preconditions: checks,
    })
}

/// Dyadic shells `(∫_{t<=|ξ|<=2t} (|ξ|^w |F|)^q)^{1/q} = O(φ(1/t))` as `t → ∞`.
pub fn shell_decay_check(
    f: &RadialProfile,
    rate: &RatePair,
    phi: &PosFunc,
    t_grid: &[f64],
    settings: &Settings,
) -> Result<AsymptoticVerdict> {
    validate_t_grid(t_grid)?;
    check_dimension(f, rate)?;
    let w = rate.weight();
    let lhs: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| shell_integral(f, t, w, rate.q, &settings.quad))
        .collect::<Result<_>>()?;
    let rhs = eval_phi(phi, t_grid, |t| 1.0 / t)?;
    Ok(AsymptoticVerdict {
        regime: Regime::Large,
        report: BoundReport::one_sided(t_grid.to_vec(), lhs, rhs, settings.threshold),
        preconditions: Vec::new(),
    })
}

/// Tails `(∫_{|ξ|>=1/h} (|ξ|^w |F|)^q)^{1/q} = O(φ(h))` as `h → 0⁺`.
///
/// A tail that never settles is reported as [`Verdict::DivergentTail`] with
/// an infinite left side.
pub fn tail_decay_check(
    f: &RadialProfile,
    rate: &RatePair,
    phi: &PosFunc,
    h_grid: &[f64],
    settings: &Settings,
) -> Result<AsymptoticVerdict> {
    validate_t_grid(h_grid)?;
    check_dimension(f, rate)?;
    let w = rate.weight();
    let tails: Vec<Option<(f64, f64)>> = h_grid
        .par_iter()
        .map(
            |&h| match tail_power(f, 1.0 / h, w, rate.q, &settings.quad) {
                Ok(t) => Ok(Some((t.value.powf(1.0 / rate.q), t.rel_change))),
                Err(e) if e.is_divergence() => Ok(None),
                Err(e) => Err(e),
            },
        )
        .collect::<Result<_>>()?;
    let lhs: Vec<f64> = tails
        .iter()
        .map(|t| t.map_or(f64::INFINITY, |v| v.0))
        .collect();
    let rhs = eval_phi(phi, h_grid, |h| h)?;
    let mut report = BoundReport::one_sided(h_grid.to_vec(), lhs, rhs, settings.threshold);
    if let Some(i) = tails.iter().position(Option::is_none) {
        report = report.fail(
            Verdict::DivergentTail,
            format!("tail beyond radius {:e} does not converge", 1.0 / h_grid[i]),
        );
    } else {
        let change = tails.iter().flatten().map(|v| v.1).fold(0.0, f64::max);
        report = report.with_probe(change, settings.quad.probe_tol);
    }
    Ok(AsymptoticVerdict {
        regime: Regime::Small,
        report,
        preconditions: Vec::new(),
    })
}

/// Shell and tail conditions side by side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub shell: AsymptoticVerdict,
    pub tail: AsymptoticVerdict,
    /// Constant of `∫_0^t φ(u)^q du/u <= C φ(t)^q`.
    pub m_constant: f64,
    /// `C_shell (1 + C / ln 2)^{1/q}`, the tail constant implied by the shells.
    pub chain_constant: f64,
    pub tail_finite: bool,
    /// `None` when the tail diverges and nothing is asserted.
    pub holds: Option<bool>,
    pub preconditions: Vec<Check>,
}

/// Shells at `1/h` against tails at `h`, for `h` in `h_grid`.
///
/// Summing the shells beyond `1/h` and comparing the sum with
/// `∫_0^h φ(u)^q du/u` gives `tail <= C_shell (1 + C_{M,q}/ln 2)^{1/q} φ(h)`;
/// in the other direction each shell is part of its tail.
pub fn lemma_equivalence(
    f: &RadialProfile,
    rate: &RatePair,
    phi: &PosFunc,
    h_grid: &[f64],
    settings: &Settings,
) -> Result<LemmaReport> {
    let quad = &settings.quad;
    let m = check_m(phi, &default_small_grid(), quad, settings.threshold)?;
    let checks = vec![Check::new(
        "φ in M",
        m.pass,
        format!(
            "{}: ratio_sup {:e}, verdict {:?}",
            phi.label(),
            m.ratio_sup,
            m.verdict
        ),
    )];
    settings.gate(&checks)?;
    let mq = check_m(
        &phi.clone().powered(rate.q),
        &default_small_grid(),
        quad,
        f64::INFINITY,
    )?;
    let m_constant = mq.ratio_sup;

    let shell = shell_decay_check(f, rate, phi, &reciprocal_grid(h_grid), settings)?;
    let tail = tail_decay_check(f, rate, phi, h_grid, settings)?;
    let chain_constant = shell.constant() * (1.0 + m_constant / LN_2).powf(1.0 / rate.q);
    let tail_finite = tail.report.verdict != Verdict::DivergentTail;
    let holds = tail_finite.then(|| {
        let slack = 1.0 + CHAIN_SLACK;
        shell.pass() == tail.pass()
            && tail.constant() <= chain_constant * slack
            && shell.constant() <= tail.constant() * slack
    });
    Ok(LemmaReport {
        shell,
        tail,
        m_constant,
        chain_constant,
        tail_finite,
        holds,
        preconditions: checks,
    })
}

/// Range check of `(2π)^{d/2} E/J` against the family's admissibility ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Congruence {
    pub scaled_inf: f64,
    pub scaled_sup: f64,
    pub admissible_inf: f64,
    pub admissible_sup: f64,
    pub tolerance: f64,
    pub within: bool,
}

/// `J(t)` (spectral side) and `E(t) = ‖T_t f - f‖_p` over a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoSidedReport {
    pub grid: Vec<f64>,
    pub j: Vec<f64>,
    pub e: Vec<f64>,
    /// `J <= C E`, computed in the forward range.
    pub part_a: Option<BoundReport>,
    /// `E <= C J`, computed in the backward range.
    pub part_b: Option<BoundReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub congruence: Option<Congruence>,
    pub preconditions: Vec<Check>,
}

const CONGRUENCE_TOL: f64 = 1e-3;

/// `F(s) min(1, ts)^{2γ} s^w`.
fn smoothed_spectrum(f: &RadialProfile, t: f64, gamma: f64, w: f64) -> RadialProfile {
    let factor = Factor {
        label: format!("min(1, {t} s)^{}", 2.0 * gamma),
        f: Arc::new(move |s: f64| {
            if s == 0.0 {
                return 0.0;
            }
            (t * s).min(1.0).powf(2.0 * gamma) * s.powf(w)
        }),
        cap: WidthCap::NONE,
        breaks: vec![1.0 / t],
    };
    RadialProfile {
        shape: f.shape.clone().multiplied(factor),
        ..f.clone()
    }
}

/// `(σ_{d-1} ∫ (s^w |F(s)|)^q s^{d-1} ds)^{1/q} < ∞`, as a precondition record.
pub(crate) fn weighted_norm_check(
    f: &RadialProfile,
    w: f64,
    q: f64,
    quad: &QuadratureSpec,
) -> Result<Check> {
    let norm = match tail_power(f, 0.0, w, q, quad) {
        Ok(t) => Some(t.value.powf(1.0 / q)),
        Err(e) if e.is_divergence() => None,
        Err(e) => return Err(e),
    };
    Ok(Check::new(
        "finite weighted spectral norm",
        norm.is_some(),
        norm.map_or("diverges".to_string(), |v| format!("{v:e}")),
    ))
}

/// `J(t) = (σ_{d-1} ∫ [min(1, ts)^{2γ} s^w |F(s)|]^q s^{d-1} ds)^{1/q}`
/// against `E(t) = ‖T_t f - f‖_p`.
pub fn two_sided_estimate(
    fam: &MultiplierFamily,
    pair: &RadialPair,
    rate: &RatePair,
    t_grid: &[f64],
    settings: &Settings,
) -> Result<TwoSidedReport> {
    validate_t_grid(t_grid)?;
    check_dimension(&pair.fourier, rate)?;
    let mut checks = vec![
        Check::new(
            "forward range",
            rate.forward_ok(),
            format!("p = {}, q = {}", rate.p, rate.q),
        ),
        Check::new(
            "backward range",
            rate.backward_ok(),
            format!("p = {}, q = {}", rate.p, rate.q),
        ),
    ];
    let want_b = rate.backward_ok() || !settings.enforce;
    if want_b {
        checks.push(weighted_norm_check(
            &pair.fourier,
            rate.weight(),
            rate.q,
            &settings.quad,
        )?);
    }
    let run_a = checks[0].pass || !settings.enforce;
    let run_b = want_b && ((checks[1].pass && checks[2].pass) || !settings.enforce);
    if !run_a && !run_b {
        return Err(Error::precondition(format!(
            "(p, q) = ({}, {}) lies in neither the forward nor the backward range",
            rate.p, rate.q
        )));
    }
    let mut report = two_sided_tables(fam, pair, rate, t_grid, run_a, run_b, settings)?;
    report.preconditions = checks;
    Ok(report)
}

/// The two-sided tables without any range gating.
pub(crate) fn two_sided_tables(
    fam: &MultiplierFamily,
    pair: &RadialPair,
    rate: &RatePair,
    t_grid: &[f64],
    run_a: bool,
    run_b: bool,
    settings: &Settings,
) -> Result<TwoSidedReport> {
    validate_t_grid(t_grid)?;
    let quad = &settings.quad;
    let w = rate.weight();
    let rows: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let j = radial_lp_norm(
                &smoothed_spectrum(&pair.fourier, t, fam.gamma, w),
                rate.q,
                quad,
            )?;
            let e = approx_error_norm(fam, t, pair, rate.p, quad)?;
            Ok((j, e))
        })
        .collect::<Result<_>>()?;
    let (j, e): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let grid = t_grid.to_vec();
    let part_a = run_a
        .then(|| BoundReport::one_sided(grid.clone(), j.clone(), e.clone(), settings.threshold));
    let part_b = run_b
        .then(|| BoundReport::one_sided(grid.clone(), e.clone(), j.clone(), settings.threshold));

    let congruence = if rate.is_l2() && j.iter().any(|v| *v > 0.0) {
        let adm = check_admissible(fam, &default_admissibility_grid())?.report;
        let scale = (2.0 * PI).powf(f64::from(rate.d) / 2.0);
        let scaled: Vec<f64> = e
            .iter()
            .zip(&j)
            .filter(|(_, j)| **j > 0.0)
            .map(|(e, j)| scale * e / j)
            .collect();
        let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Congruence {
            scaled_inf: lo,
            scaled_sup: hi,
            admissible_inf: adm.ratio_inf,
            admissible_sup: adm.ratio_sup,
            tolerance: CONGRUENCE_TOL,
            within: lo >= adm.ratio_inf - CONGRUENCE_TOL && hi <= adm.ratio_sup + CONGRUENCE_TOL,
        })
    } else {
        None
    };
    Ok(TwoSidedReport {
        grid,
        j,
        e,
        part_a,
        part_b,
        congruence,
        preconditions: Vec::new(),
    })
}

fn range_check(rate: &RatePair, forward: bool) -> Check {
    let (name, ok) = if forward {
        ("forward range 1 < p <= 2, p <= q <= p'", rate.forward_ok())
    } else {
        ("backward range 2 <= p, p' <= q <= p", rate.backward_ok())
    };
    Check::new(name, ok, format!("p = {}, q = {}", rate.p, rate.q))
}

fn verdict_status(hypothesis: bool, conclusion_ok: bool) -> Status {
    match (hypothesis, conclusion_ok) {
        (false, _) => Status::Vacuous,
        (true, true) => Status::Holds,
        (true, false) => Status::Violated,
    }
}

/// Lipschitz smoothness `⇒` shell decay.
///
/// Shells are taken at the reciprocals of `t_grid`, so that
/// `shell(1/t) <= J(t) <= C_A E(t) <= C_A C_lip φ(t)` holds point by point and
/// the shell constant can be compared with `C_A C_lip`.
pub fn titchmarsh_forward(
    fam: &MultiplierFamily,
    pair: &RadialPair,
    rate: &RatePair,
    phi: &PosFunc,
    t_grid: &[f64],
    settings: &Settings,
) -> Result<ImplicationReport> {
    let checks = vec![range_check(rate, true)];
    settings.gate(&checks)?;
    forward_impl(fam, pair, rate, phi, t_grid, checks, settings)
}

/// The forward chain once the caller's own preconditions have been gated.
pub(crate) fn forward_impl(
    fam: &MultiplierFamily,
    pair: &RadialPair,
    rate: &RatePair,
    phi: &PosFunc,
    t_grid: &[f64],
    mut checks: Vec<Check>,
    settings: &Settings,
) -> Result<ImplicationReport> {
    let beta = fam.gamma;
    let lip = lip_check(fam, pair, rate.p, phi, beta, t_grid, settings)?;
    checks.extend(lip.preconditions.iter().cloned());
    let mut constants = BTreeMap::from([("lip".to_string(), lip.constant())]);
    let statement = format!("Lip(p={}, β={beta}, {}) ⇒ shell decay", rate.p, phi.label());
    if !lip.pass() {
        return Ok(ImplicationReport {
            statement,
            hypothesis: lip,
            conclusion: None,
            chain_constant: None,
            constants,
            preconditions: checks,
            status: Status::Vacuous,
            tables: BTreeMap::new(),
            notes: Vec::new(),
        });
    }
    let shell = shell_decay_check(&pair.fourier, rate, phi, &reciprocal_grid(t_grid), settings)?;
    let part_a = two_sided_tables(fam, pair, rate, t_grid, true, false, settings)?
        .part_a
        .ok_or_else(|| Error::precondition("two-sided estimate part A unavailable"))?;
    let chain = part_a.ratio_sup * lip.constant();
    constants.insert("two_sided_a".into(), part_a.ratio_sup);
    constants.insert("shell".into(), shell.constant());
    let ok = shell.pass() && shell.constant() <= chain * (1.0 + CHAIN_SLACK);
    Ok(ImplicationReport {
        statement,
        status: verdict_status(true, ok),
        hypothesis: lip,
        conclusion: Some(shell),
        chain_constant: Some(chain),
        constants,
        preconditions: checks,
        tables: BTreeMap::from([("two_sided_a".to_string(), part_a)]),
        notes: Vec::new(),
    })
}

/// Shell decay `⇒` Lipschitz smoothness, for `φ ∈ Ω_{2β}`.
///
/// `J(t)^q` is split into the tail beyond `1/t` and `t^{2qβ}` times the
/// low-frequency moment below `1/t`; both pieces are measured against
/// `φ(t)^q` and chained through `E <= C_B J`.
pub fn titchmarsh_backward(
    fam: &MultiplierFamily,
    f: &RadialProfile,
    rate: &RatePair,
    phi: &PosFunc,
    t_grid: &[f64],
    settings: &Settings,
) -> Result<ImplicationReport> {
    validate_t_grid(t_grid)?;
    check_dimension(f, rate)?;
    let checks = vec![
        range_check(rate, false),
        omega_check(phi, 2.0 * fam.gamma, &settings.quad)?,
        weighted_norm_check(f, rate.weight(), rate.q, &settings.quad)?,
    ];
    settings.gate(&checks)?;
    backward_impl(fam, f, rate, phi, t_grid, checks, settings)
}

/// The backward chain once the caller's own preconditions have been gated.
/// Shells use exponent `rate.q`, the Lipschitz norm uses `rate.p`.
pub(crate) fn backward_impl(
    fam: &MultiplierFamily,
    f: &RadialProfile,
    rate: &RatePair,
    phi: &PosFunc,
    t_grid: &[f64],
    mut checks: Vec<Check>,
    settings: &Settings,
) -> Result<ImplicationReport> {
    let beta = fam.gamma;
    let quad = &settings.quad;
    let shell = shell_decay_check(f, rate, phi, &reciprocal_grid(t_grid), settings)?;
    let mut constants = BTreeMap::from([("shell".to_string(), shell.constant())]);
    let statement = format!(
        "shell decay (q={}) ⇒ Lip(p={}, β={beta}, {})",
        rate.q,
        rate.p,
        phi.label()
    );
    if !shell.pass() {
        return Ok(ImplicationReport {
            statement,
            hypothesis: shell,
            conclusion: None,
            chain_constant: None,
            constants,
            preconditions: checks,
            status: Status::Vacuous,
            tables: BTreeMap::new(),
            notes: Vec::new(),
        });
    }

    let pair = RadialPair::new(
        fourier_radial_lazy(f, quad),
        f.clone(),
        Provenance::Computed,
    )?;
    let lip = lip_check(fam, &pair, rate.p, phi, beta, t_grid, settings)?;
    checks.extend(lip.preconditions.iter().cloned());
    let two = two_sided_tables(fam, &pair, rate, t_grid, false, true, settings)?;
    let part_b = two
        .part_b
        .clone()
        .ok_or_else(|| Error::precondition("two-sided estimate part B unavailable"))?;

    let (w, q) = (rate.weight(), rate.q);
    let sigma = sphere_area(f.d);
    let dm1 = (f.d - 1) as i32;
    let mesh = Mesh::new(f.shape.breaks(), f.shape.cap());
    let pieces: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let tail = tail_power(f, 1.0 / t, w, q, quad)?.value;
            let low = quad::integrate(
                |s| Ok(s.powi(dm1) * (s.powf(2.0 * beta + w) * f.shape.eval(s)?.abs()).powf(q)),
                0.0,
                1.0 / t,
                quad,
                &mesh,
            )?;
            Ok((tail, sigma * t.powf(2.0 * q * beta) * low))
        })
        .collect::<Result<_>>()?;
    let phi_q: Vec<f64> = t_grid
        .iter()
        .map(|&t| Ok(phi.eval(t)?.powf(q)))
        .collect::<Result<_>>()?;
    let grid = t_grid.to_vec();
    let tail_table = BoundReport::one_sided(
        grid.clone(),
        pieces.iter().map(|p| p.0).collect(),
        phi_q.clone(),
        settings.threshold,
    );
    let low_table = BoundReport::one_sided(
        grid,
        pieces.iter().map(|p| p.1).collect(),
        phi_q,
        settings.threshold,
    );
    let split_defect = pieces
        .iter()
        .zip(&two.j)
        .map(|((a, b), j)| {
            let jq = j.powf(q);
            if jq == 0.0 {
                0.0
            } else {
                (a + b - jq).abs() / jq
            }
        })
        .fold(0.0, f64::max);

    let chain = part_b.ratio_sup * (tail_table.ratio_sup + low_table.ratio_sup).powf(1.0 / q);
    constants.insert("two_sided_b".into(), part_b.ratio_sup);
    constants.insert("tail_part".into(), tail_table.ratio_sup);
    constants.insert("low_frequency_part".into(), low_table.ratio_sup);
    constants.insert("split_defect".into(), split_defect);
    constants.insert("lip".into(), lip.constant());
    let ok = lip.pass()
        && low_table.pass
        && split_defect <= 1e-6
        && lip.constant() <= chain * (1.0 + CHAIN_SLACK);
    Ok(ImplicationReport {
        statement,
        status: verdict_status(true, ok),
        hypothesis: shell,
        conclusion: Some(lip),
        chain_constant: Some(chain),
        constants,
        preconditions: checks,
        tables: BTreeMap::from([
            ("two_sided_b".to_string(), part_b),
            ("tail_part".to_string(), tail_table),
            ("low_frequency_part".to_string(), low_table),
        ]),
        notes: Vec::new(),
    })
}

/// Both directions at `p = q = 2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IffReport {
    pub forward: ImplicationReport,
    pub backward: ImplicationReport,
    /// Neither direction is violated and the two hypotheses agree.
    pub holds: bool,
}

/// Lipschitz smoothness `⇔` shell decay, only asserted for `p = q = 2`.
pub fn titchmarsh_iff(
    fam: &MultiplierFamily,
    pair: &RadialPair,
    rate: &RatePair,
    phi: &PosFunc,
    t_grid: &[f64],
    settings: &Settings,
) -> Result<IffReport> {
    if !rate.is_l2() {
        return Err(Error::precondition(format!(
            "the equivalence is only asserted for p = q = 2, got p = {}, q = {}",
            rate.p, rate.q
        )));
    }
    let forward = titchmarsh_forward(fam, pair, rate, phi, t_grid, settings)?;
    let backward = titchmarsh_backward(fam, &pair.fourier, rate, phi, t_grid, settings)?;
    let holds = forward.holds()
        && backward.holds()
        && forward.hypothesis.pass() == backward.hypothesis.pass();
    Ok(IffReport {
        forward,
        backward,
        holds,
    })
}
