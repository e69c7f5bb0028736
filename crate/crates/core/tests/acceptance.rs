//! Acceptance criteria 1-9, run in sequence with one PASS/FAIL line each.
//!
//! Lines are written to the process stdout directly so they survive the test
//! harness's output capture.

use std::collections::BTreeMap;
use std::f64::consts::{E, LN_10, LN_2, PI};
use std::io::Write;
use std::time::{Duration, Instant};

use fourier_decay::catalog::{get_bv, get_pair, get_spectrum};
use fourier_decay::gm::{
    build_gm_pair, check_gm, check_gm_d, default_gm_grid, riemann_lebesgue_bound, GmOptions,
};
use fourier_decay::majorant::{
    catalog_majorants, check_m, check_omega, default_large_grid, default_small_grid,
    large_grid_for, omega_equivalence, OmegaOptions, PosFunc,
};
use fourier_decay::multipliers::{
    check_admissible, combination_weights, default_admissibility_grid, m_r_integral, m_r_series,
    ExponentMode, MultiplierFamily, WEIGHT_TOL,
};
use fourier_decay::quad::{linear_grid, log_grid};
use fourier_decay::radial::{fourier_radial, radial_lp_norm, shell_integral, tail_power};
use fourier_decay::smoothness::{
    besov_spectral_functional, counterexample_remark, default_schedule, lip_check,
    shell_decay_check, titchmarsh_iff, two_sided_estimate, RatePair, Settings, SpectralMode,
    Status,
};
use fourier_decay::{QuadratureSpec, Result, Verdict};

/// Collected failures of one criterion.
#[derive(Default)]
struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn close(&mut self, got: f64, want: f64, rel: f64, what: &str) {
        let err = if want == 0.0 {
            got.abs()
        } else {
            (got - want).abs() / want.abs()
        };
        self.require(
            err <= rel,
            format!("{what}: got {got:.12e}, want {want:.12e} (rel {err:.2e} > {rel:e})"),
        );
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn run(
    id: u32,
    title: &str,
    budget: Duration,
    body: impl FnOnce(&mut Outcome) -> Result<()>,
) -> bool {
    let mut o = Outcome::default();
    let start = Instant::now();
    if let Err(e) = body(&mut o) {
        o.failures.push(format!("error: {e}"));
    }
    let elapsed = start.elapsed();
    if elapsed > budget {
        o.failures
            .push(format!("runtime {elapsed:.2?} exceeds {budget:?}"));
    }
    let ok = o.failures.is_empty();
    emit(&format!(
        "[acceptance] criterion {id} {} {title} ({elapsed:.2?}, budget {budget:?})",
        if ok { "PASS" } else { "FAIL" }
    ));
    for n in &o.notes {
        emit(&format!("[acceptance]     {n}"));
    }
    for f in &o.failures {
        emit(&format!("[acceptance]     failure: {f}"));
    }
    ok
}

fn no_params() -> BTreeMap<String, f64> {
    BTreeMap::new()
}

fn majorant_constants(o: &mut Outcome) -> Result<()> {
    let quad = QuadratureSpec::default();
    for alpha in [0.25, 0.5, 1.0] {
        let r = check_m(&PosFunc::power(alpha), &default_small_grid(), &quad, 1e3)?;
        o.close(
            r.ratio_sup,
            1.0 / alpha,
            1e-6,
            &format!("check_m t^{alpha}"),
        );
    }
    for (alpha, beta) in [(1.0, 2.0), (0.5, 1.0)] {
        let r = check_omega(
            &PosFunc::power(alpha),
            beta,
            &default_large_grid(),
            &OmegaOptions::default(),
            &quad,
        )?;
        o.close(
            r.ratio_sup,
            1.0 / (beta - alpha),
            1e-6,
            &format!("check_omega t^{alpha} vs {beta}"),
        );
    }
    let beta = 0.5;
    let r = check_omega(
        &PosFunc::power(2.0 * beta),
        2.0 * beta,
        &default_large_grid(),
        &OmegaOptions::default(),
        &quad,
    )?;
    o.require(
        !r.pass && r.verdict == Verdict::DivergentTail,
        format!("t^(2β) against Ω_(2β): verdict {:?}", r.verdict),
    );
    o.note(format!(
        "t^(2β) tail probe change {:.3e}",
        r.probe_change.unwrap_or(f64::NAN)
    ));
    Ok(())
}

fn admissibility(o: &mut Outcome) -> Result<()> {
    let grid = default_admissibility_grid();
    for fam in [MultiplierFamily::gauss(), MultiplierFamily::poisson()] {
        let r = check_admissible(&fam, &grid)?.report;
        o.require(r.pass, format!("{} not admissible", fam.label));
        o.require(
            (r.ratio_inf - 0.632).abs() <= 0.01 && (r.ratio_sup - 1.0).abs() <= 0.01,
            format!(
                "{} bounds [{:.4}, {:.4}]",
                fam.label, r.ratio_inf, r.ratio_sup
            ),
        );
        o.note(format!(
            "{} (γ = {}) bounds [{:.6}, {:.6}]",
            fam.label, fam.gamma, r.ratio_inf, r.ratio_sup
        ));
    }
    let wrong = check_admissible(&MultiplierFamily::gauss().with_gamma(2.0), &grid)?.report;
    o.require(!wrong.pass, "gauss against γ = 2 passed");
    Ok(())
}

fn spherical(o: &mut Outcome) -> Result<()> {
    let mut worst: f64 = 0.0;
    for u in linear_grid(0.0, 50.0, 500) {
        let v = m_r_series(1.0, 3, u, WEIGHT_TOL)?.value;
        let want = if u == 0.0 { 1.0 } else { u.sin() / u };
        worst = worst.max((v - want).abs());
    }
    o.require(
        worst <= 1e-12,
        format!("m_1 (d = 3) vs sin u/u: max error {worst:e}"),
    );
    o.note(format!(
        "m_1 (d = 3) vs sin u / u: max abs error {worst:.2e}"
    ));

    let mut worst: f64 = 0.0;
    for r in [1.0, 1.5, 2.0] {
        for d in [2, 3] {
            for u in linear_grid(0.0, 30.0, 120) {
                let a = m_r_integral(r, d, u, ExponentMode::Corrected)?;
                let b = m_r_series(r, d, u, WEIGHT_TOL)?.value;
                worst = worst.max((a - b).abs());
            }
        }
    }
    o.require(
        worst <= 1e-5,
        format!("integral vs series: max error {worst:e}"),
    );
    o.note(format!(
        "integral vs series route: max abs error {worst:.2e}"
    ));

    for r in 1..=5 {
        let s = combination_weights(f64::from(r), WEIGHT_TOL)?.sum();
        o.require((s - 1.0).abs() <= 1e-10, format!("Σ w_k for r = {r}: {s}"));
    }
    for r in [1.0, 2.0] {
        for d in [2, 3] {
            let rep = check_admissible(
                &MultiplierFamily::spherical(r, d)?,
                &default_admissibility_grid(),
            )?
            .report;
            let spread = rep.ratio_sup / rep.ratio_inf;
            o.require(
                rep.pass && spread < 1e3,
                format!("spherical r = {r}, d = {d}: spread {spread:e}"),
            );
            o.note(format!(
                "spherical r = {r}, d = {d}: bounds [{:.4e}, {:.4e}]",
                rep.ratio_inf, rep.ratio_sup
            ));
        }
    }
    Ok(())
}

fn transform_engine(o: &mut Outcome) -> Result<()> {
    let quad = QuadratureSpec::default();
    let grid = [0.0, 0.5, 1.0, 2.0, 3.0, 5.0];
    for d in 1..=3 {
        let pair = get_pair("gaussian", d, &no_params())?;
        let fwd = fourier_radial(&pair.space, &grid, &quad)?;
        let back = fourier_radial(&pair.fourier, &grid, &quad)?;
        for &s in &grid {
            let scale = pair.fourier.eval(0.0)?;
            let (got, want) = (fwd.eval(s)?, pair.fourier.eval(s)?);
            o.require(
                (got - want).abs() <= 1e-6 * want.max(1e-6 * scale),
                format!("forward d = {d} at {s}: {got} vs {want}"),
            );
            let (got, want) = (back.eval(s)?, pair.space.eval(s)?);
            o.require(
                (got - want).abs() <= 1e-6 * want.max(1e-6),
                format!("inverse d = {d} at {s}: {got} vs {want}"),
            );
        }
        let space = radial_lp_norm(&pair.space, 2.0, &quad)?;
        let spec =
            (2.0 * PI).powf(-f64::from(d) / 2.0) * radial_lp_norm(&pair.fourier, 2.0, &quad)?;
        o.close(space, spec, 1e-6, &format!("Plancherel d = {d}"));
        o.close(
            space,
            PI.powf(f64::from(d) / 4.0),
            1e-6,
            &format!("‖e^(-r²/2)‖₂ d = {d}"),
        );
    }
    for (name, d) in [("compact_bump", 1), ("compact_bump", 3)] {
        let f = get_spectrum(name, d, &no_params())?;
        for (w, q) in [(0.0, 2.0), (0.5, 3.0)] {
            let t = 0.01;
            let tail = tail_power(&f, t, w, q, &quad)?.value;
            let mut shells = 0.0;
            let mut k = 0;
            while t * 2f64.powi(k) < 1.0 {
                shells += shell_integral(&f, t * 2f64.powi(k), w, q, &quad)?.powf(q);
                k += 1;
            }
            o.close(
                shells,
                tail,
                1e-8,
                &format!("{name} d = {d} w = {w} q = {q}: Σ shells vs tail"),
            );
        }
    }
    Ok(())
}

fn titchmarsh(o: &mut Outcome) -> Result<()> {
    let s = Settings::default();
    let alpha = 0.5;
    let pair = get_pair(
        "power_tail",
        1,
        &BTreeMap::from([("sigma".into(), alpha + 0.5)]),
    )?;
    let phi = PosFunc::power(alpha);
    let rate = RatePair::new(2.0, 2.0, 1)?;
    let fam_full = MultiplierFamily::gauss();
    let t_grid = log_grid(1e-3, 1e-1, 4);

    // ∫_{|ξ| > 1/h} s^{-2} dξ = 2h.
    for h in [1e-3, 1e-2, 1e-1] {
        let v = tail_power(&pair.fourier, 1.0 / h, 0.0, 2.0, &s.quad)?.value;
        o.close(v, 2.0 * h, 1e-2, &format!("tail at h = {h}"));
    }
    let lip = lip_check(&fam_full, &pair, 2.0, &phi, 1.0, &t_grid, &s)?;
    o.require(
        lip.pass() && lip.constant().is_finite(),
        format!("lip_check constant {:e}", lip.constant()),
    );
    let shell = shell_decay_check(&pair.fourier, &rate, &phi, &log_grid(10.0, 1e3, 4), &s)?;
    o.require(
        shell.pass() && shell.constant().is_finite(),
        format!("shell constant {:e}", shell.constant()),
    );
    let iff = titchmarsh_iff(&fam_full, &pair, &rate, &phi, &t_grid, &s)?;
    o.require(iff.holds, "iff does not hold");
    for (name, rep) in [("forward", &iff.forward), ("backward", &iff.backward)] {
        o.require(
            rep.status == Status::Holds,
            format!("{name} status {:?}", rep.status),
        );
        let chain = rep.chain_constant.unwrap_or(f64::INFINITY);
        o.require(chain.is_finite(), format!("{name} chain constant {chain}"));
        o.note(format!(
            "{name}: chain constant {chain:.6e}, constants {:?}",
            rep.constants
        ));
    }
    let two = two_sided_estimate(&fam_full, &pair, &rate, &t_grid, &s)?;
    match two.congruence {
        Some(c) => {
            o.require(c.within, format!("congruence {c:?}"));
            o.note(format!(
                "(2π)^(1/2) E/J in [{:.6}, {:.6}], admissibility [{:.6}, {:.6}]",
                c.scaled_inf, c.scaled_sup, c.admissible_inf, c.admissible_sup
            ));
        }
        None => o.require(false, "no congruence data"),
    }
    Ok(())
}

fn fubini(o: &mut Outcome) -> Result<()> {
    let s = Settings::default();
    let cases: [(&str, u32, BTreeMap<String, f64>, f64, Option<f64>); 3] = [
        (
            "power_tail",
            1,
            BTreeMap::from([("sigma".into(), 1.0)]),
            0.4,
            Some(10.0 * LN_2),
        ),
        ("gaussian", 1, no_params(), 0.5, None),
        ("exponential_spectrum", 3, no_params(), 0.5, None),
    ];
    for (name, d, params, alpha, exact) in cases {
        let f = get_spectrum(name, d, &params)?;
        let rate = RatePair::new(2.0, 2.0, d)?;
        let phi = PosFunc::power(alpha);
        let single = besov_spectral_functional(&f, &rate, &phi, SpectralMode::Single, &s)?;
        let double = besov_spectral_functional(&f, &rate, &phi, SpectralMode::Double, &s)?;
        o.require(
            single.finite && double.finite,
            format!("{name}: not finite"),
        );
        // `Single` already carries the ln 2 from ∫ 1[t <= s <= 2t] dt/t.
        o.close(
            double.value,
            single.value,
            5e-3,
            &format!("{name}: double vs ln 2 × radial"),
        );
        if let Some(v) = exact {
            o.close(single.value, v, 1e-6, &format!("{name}: exact value"));
        }
        o.note(format!(
            "{name} (d = {d}, φ = t^{alpha}): radial {:.9e}, ln 2 × radial {:.9e}, double {:.9e}",
            single.value / LN_2,
            single.value,
            double.value
        ));
    }
    Ok(())
}

fn remark(o: &mut Outcome) -> Result<()> {
    let schedule = default_schedule();
    let r = counterexample_remark(0.5, 2.0, 1, &schedule, &Settings::default())?;
    o.require(r.stable, format!("tail ratio spread {:e}", r.ratio_spread));
    o.require(
        r.ratio_spread <= 0.01,
        format!("tail ratio spread {:e}", r.ratio_spread),
    );
    for g in &r.growth_per_decade {
        o.require(
            (g / LN_10 - 1.0).abs() <= 0.02,
            format!("growth per decade {g} vs ln 10"),
        );
    }
    o.require(r.omega_fails, "φ = t^(2β) not rejected");
    o.note(format!(
        "schedule {:?}: tail ratios {:?}, growth per decade {:?}",
        schedule,
        r.tail.ratios(),
        r.growth_per_decade
    ));
    Ok(())
}

fn gm_suite(o: &mut Outcome) -> Result<()> {
    let opts = GmOptions::default();
    let g = get_bv("exponential_spectrum", 3, &no_params())?;
    let r = check_gm(&g, 2.0, &default_gm_grid(), &opts)?;
    o.require(r.pass(), format!("e^(-s) at c = 2: {:?}", r.report.notes));
    o.note(format!(
        "e^(-s), c = 2: ratio_sup {:.6e}",
        r.report.ratio_sup
    ));
    let dr = check_gm_d(&g, 3, &default_gm_grid(), &opts)?;
    o.require(dr.pass, "check_gm_d failed");
    o.close(
        dr.near_zero.value,
        2.0 - 5.0 / E,
        1e-6,
        "∫_0^1 s² e^(-s) ds",
    );
    o.close(dr.variation.value, 2.0 / E, 1e-6, "∫_1^∞ s e^(-s) ds");
    o.note(format!(
        "GM^3 terms {:.12} and {:.12} (oracles {:.12}, {:.12})",
        dr.near_zero.value,
        dr.variation.value,
        2.0 - 5.0 / E,
        2.0 / E
    ));

    let s = Settings::default();
    let xi = log_grid(10.0, 1e3, 4);
    let phi = PosFunc::power(0.5);
    // σ = d/q' + α with d = 1, q = 2, α = 1/2.
    let matched = build_gm_pair(
        &get_bv("power_tail", 1, &BTreeMap::from([("sigma".into(), 1.0)]))?,
        1,
        2.0,
        &opts,
    )?;
    let rl = riemann_lebesgue_bound(&matched, 2.0, &phi, &xi, 2.0, &s)?;
    o.require(
        rl.pointwise.pass() && rl.pointwise.constant().is_finite() && rl.holder.pass,
        format!("matched power tail: constant {:e}", rl.pointwise.constant()),
    );
    o.note(format!(
        "matched power tail: pointwise constant {:.6e}, Hölder constant {:.6e}",
        rl.pointwise.constant(),
        rl.holder.ratio_sup
    ));
    let compact = build_gm_pair(&get_bv("compact_bump", 1, &no_params())?, 1, 2.0, &opts)?;
    let rl = riemann_lebesgue_bound(&compact, 2.0, &phi, &xi, 2.0, &s)?;
    let ratios = rl.pointwise.report.ratios();
    o.require(
        rl.pointwise.pass() && ratios.last() == Some(&0.0),
        format!("compact spectrum ratios {ratios:?}"),
    );
    Ok(())
}

fn omega_grid_equivalence(o: &mut Outcome) -> Result<()> {
    let quad = QuadratureSpec::default();
    let beta = 1.0;
    for m in catalog_majorants() {
        let alpha = m.params["alpha"];
        if !(alpha < beta) {
            continue;
        }
        let r = omega_equivalence(
            &m.func,
            beta,
            &large_grid_for(&m.func),
            &OmegaOptions::default(),
            &quad,
        )?;
        let bound = r.chain_bound.unwrap_or(f64::NAN);
        o.require(r.epsilon.is_some(), format!("{}: no ε found", m.name));
        o.require(
            r.omega.pass,
            format!(
                "{}: Ω_1 check failed: {:?} {:?}",
                m.name, r.omega.verdict, r.omega.notes
            ),
        );
        o.require(
            r.holds && r.omega.ratio_sup <= 2.0 * bound,
            format!(
                "{}: Ω constant {:e} vs 2 × {bound:e}",
                m.name, r.omega.ratio_sup
            ),
        );
        o.note(format!(
            "{}: ε = {:?}, Ω constant {:.6e}, (2/ε)·C = {bound:.6e}",
            m.name, r.epsilon, r.omega.ratio_sup
        ));
    }
    Ok(())
}

#[test]
fn acceptance() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "majorant constants", secs(1), majorant_constants),
        run(
            2,
            "admissibility of gauss and poisson",
            secs(1),
            admissibility,
        ),
        run(3, "spherical combination", secs(30), spherical),
        run(4, "transform engine", secs(10), transform_engine),
        run(
            5,
            "Titchmarsh equivalence at p = q = 2",
            secs(30),
            titchmarsh,
        ),
        run(
            6,
            "Fubini identity for the spectral functional",
            secs(10),
            fubini,
        ),
        run(7, "counterexample without Ω_(2β)", secs(10), remark),
        run(8, "general monotone suite", secs(10), gm_suite),
        run(
            9,
            "Ω_β against almost-decreasing witnesses",
            secs(5),
            omega_grid_equivalence,
        ),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
