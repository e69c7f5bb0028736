use std::path::PathBuf;

use fourier_decay::catalog::{get_bv, get_pair_with, list_catalog};
use fourier_decay::gm::{
    build_gm_pair, check_gm, check_gm_d, default_gm_grid, gm_scan, riemann_lebesgue_bound,
    BVProfile, GmOptions, DEFAULT_C_SCAN,
};
use fourier_decay::majorant::{
    check_m, check_omega, default_small_grid, large_grid_for, omega_equivalence, parse_majorant,
    OmegaOptions, PosFunc,
};
use fourier_decay::multipliers::{
    builtin_family, check_admissible, default_admissibility_grid, MultiplierFamily,
};
use fourier_decay::quad::log_grid;
use fourier_decay::radial::io::{read_profile, write_profile};
use fourier_decay::radial::{fourier_radial_lazy, Provenance, RadialPair, RadialProfile, Side};
use fourier_decay::smoothness::{
    besov_spectral_functional, counterexample_remark, default_schedule, theorem_besov,
    titchmarsh_backward, titchmarsh_forward, titchmarsh_iff, BesovInput, Direction, RatePair,
    Settings, SpectralMode, Status,
};
use fourier_decay::{Error, QuadratureSpec, Result};
use serde_json::{json, Value};

use crate::config::{parse_grid, parse_named, RunConfig};

/// A finished verification: the verdict and the payload for the report.
pub struct Outcome {
    pub pass: bool,
    pub result: Value,
}

impl Outcome {
    fn new(pass: bool, result: impl serde::Serialize) -> Result<Self> {
        Ok(Self {
            pass,
            result: serde_json::to_value(result)?,
        })
    }
}

/// Relative disagreement tolerated between the two spectral modes.
const FUBINI_TOL: f64 = 5e-3;

fn settings(cfg: &RunConfig) -> Settings {
    let mut s = Settings::default();
    if let Some(t) = cfg.threshold {
        s.threshold = t;
    }
    s
}

fn grid_or(cfg: &mut RunConfig, default: &str) -> Result<Vec<f64>> {
    parse_grid(cfg.grid.get_or_insert_with(|| default.to_string()))
}

fn dimension(cfg: &mut RunConfig) -> u32 {
    *cfg.d.get_or_insert(1)
}

fn rate(cfg: &mut RunConfig) -> Result<RatePair> {
    let p = *cfg.p.get_or_insert(2.0);
    let q = *cfg.q.get_or_insert(2.0);
    RatePair::new(p, q, dimension(cfg))
}

fn family(cfg: &mut RunConfig) -> Result<MultiplierFamily> {
    let (name, params) = parse_named(cfg.family.get_or_insert_with(|| "gauss".into()), "family")?;
    builtin_family(&name, &params)
}

fn majorant(cfg: &RunConfig) -> Result<PosFunc> {
    let spec = cfg
        .majorant
        .as_deref()
        .ok_or_else(|| Error::param("majorant", "required"))?;
    Ok(parse_majorant(spec)?.func)
}

/// The function under test, from the catalog or a sampled profile file.
enum Input {
    Pair(RadialPair),
    Profile(RadialProfile),
}

fn input(cfg: &mut RunConfig) -> Result<Input> {
    let d = dimension(cfg);
    match (&cfg.pair, &cfg.profile) {
        (Some(_), Some(_)) => Err(Error::param(
            "pair",
            "give either --pair or --profile, not both",
        )),
        (Some(spec), None) => {
            let (name, params) = parse_named(spec, "pair")?;
            Ok(Input::Pair(get_pair_with(
                &name,
                d,
                &params,
                &QuadratureSpec::default(),
            )?))
        }
        (None, Some(path)) => {
            let p = read_profile(path)?;
            if p.d != d {
                return Err(Error::param(
                    "d",
                    format!("profile is {}-dimensional, --d is {d}", p.d),
                ));
            }
            Ok(Input::Profile(p))
        }
        (None, None) => Err(Error::param("pair", "give --pair or --profile")),
    }
}

impl Input {
    fn into_pair(self) -> Result<RadialPair> {
        let quad = QuadratureSpec::default();
        match self {
            Input::Pair(p) => Ok(p),
            Input::Profile(p) => {
                let other = fourier_radial_lazy(&p, &quad);
                match p.side {
                    Side::Space => RadialPair::new(p, other, Provenance::Computed),
                    Side::Fourier => RadialPair::new(other, p, Provenance::Computed),
                }
            }
        }
    }

    fn into_spectrum(self) -> Result<RadialProfile> {
        match self {
            Input::Pair(p) => Ok(p.fourier),
            Input::Profile(p) if p.side == Side::Fourier => Ok(p),
            Input::Profile(_) => Err(Error::param("profile", "needs a Fourier-side profile")),
        }
    }
}

fn bv(cfg: &mut RunConfig) -> Result<BVProfile> {
    let d = dimension(cfg);
    if cfg.profile.is_none() {
        if let Some(spec) = &cfg.pair {
            let (name, params) = parse_named(spec, "pair")?;
            return get_bv(&name, d, &params);
        }
    }
    Ok(BVProfile::from_profile(&input(cfg)?.into_spectrum()?))
}

fn gm_options(cfg: &RunConfig) -> GmOptions {
    let mut o = GmOptions::default();
    if let Some(t) = cfg.threshold {
        o.threshold = t;
    }
    o
}

pub fn majorant_check(cfg: &mut RunConfig) -> Result<Outcome> {
    let phi = majorant(cfg)?;
    let quad = QuadratureSpec::default();
    let threshold = *cfg.threshold.get_or_insert(1e3);
    let grid = match &cfg.grid {
        Some(g) => parse_grid(g)?,
        None => default_small_grid(),
    };
    let m = check_m(&phi, &grid, &quad, threshold)?;
    let mut pass = m.pass;
    let mut result = json!({ "majorant": phi.label(), "m": m });
    if let Some(beta) = cfg.omega {
        let opts = OmegaOptions {
            threshold,
            ..OmegaOptions::default()
        };
        let large = large_grid_for(&phi);
        let omega = check_omega(&phi, beta, &large, &opts, &quad)?;
        pass &= omega.pass;
        result["omega"] = serde_json::to_value(&omega)?;
        if omega.pass {
            let eq = omega_equivalence(&phi, beta, &large, &opts, &quad)?;
            pass &= eq.holds;
            result["equivalence"] = serde_json::to_value(&eq)?;
        }
    }
    Outcome::new(pass, result)
}

pub fn family_admit(cfg: &mut RunConfig) -> Result<Outcome> {
    let fam = family(cfg)?;
    let grid = match &cfg.grid {
        Some(g) => parse_grid(g)?,
        None => default_admissibility_grid(),
    };
    let r = check_admissible(&fam, &grid)?;
    Outcome::new(r.report.pass, r)
}

#[derive(Debug, Clone, Copy)]
pub enum Which {
    Forward,
    Backward,
    Iff,
}

pub fn titchmarsh(cfg: &mut RunConfig, which: Which) -> Result<Outcome> {
    let fam = family(cfg)?;
    let rate = rate(cfg)?;
    let phi = majorant(cfg)?;
    let grid = grid_or(cfg, "1e-3:1e-1:8")?;
    let s = settings(cfg);
    let input = input(cfg)?;
    match which {
        Which::Forward => {
            let r = titchmarsh_forward(&fam, &input.into_pair()?, &rate, &phi, &grid, &s)?;
            Outcome::new(r.status != Status::Violated, r)
        }
        Which::Backward => {
            let r = titchmarsh_backward(&fam, &input.into_spectrum()?, &rate, &phi, &grid, &s)?;
            Outcome::new(r.status != Status::Violated, r)
        }
        Which::Iff => {
            let r = titchmarsh_iff(&fam, &input.into_pair()?, &rate, &phi, &grid, &s)?;
            Outcome::new(r.holds, r)
        }
    }
}

pub fn besov_run(cfg: &mut RunConfig) -> Result<Outcome> {
    let fam = family(cfg)?;
    let rate = rate(cfg)?;
    let phi = majorant(cfg)?;
    let direction = match cfg
        .direction
        .get_or_insert_with(|| "forward".into())
        .as_str()
    {
        "forward" => Direction::Forward,
        "backward" => Direction::Backward,
        other => {
            return Err(Error::param(
                "direction",
                format!("`{other}` is not forward or backward"),
            ))
        }
    };
    let s = settings(cfg);
    let r = match (direction, input(cfg)?) {
        (Direction::Forward, i) => theorem_besov(
            &fam,
            BesovInput::Pair(&i.into_pair()?),
            &rate,
            &phi,
            direction,
            &s,
        )?,
        (Direction::Backward, i) => theorem_besov(
            &fam,
            BesovInput::Spectrum(&i.into_spectrum()?),
            &rate,
            &phi,
            direction,
            &s,
        )?,
    };
    Outcome::new(r.status != Status::Violated, r)
}

pub fn besov_spectral(cfg: &mut RunConfig) -> Result<Outcome> {
    let rate = rate(cfg)?;
    let phi = majorant(cfg)?;
    let s = settings(cfg);
    let f = input(cfg)?.into_spectrum()?;
    let single = besov_spectral_functional(&f, &rate, &phi, SpectralMode::Single, &s)?;
    let double = besov_spectral_functional(&f, &rate, &phi, SpectralMode::Double, &s)?;
    let (agree, rel) = match (single.finite, double.finite) {
        (true, true) => {
            let rel =
                (double.value - single.value).abs() / single.value.abs().max(f64::MIN_POSITIVE);
            (rel <= FUBINI_TOL || single.value == double.value, Some(rel))
        }
        (a, b) => (a == b, None),
    };
    Outcome::new(
        agree,
        json!({ "single": single, "double": double, "relative_difference": rel, "tolerance": FUBINI_TOL }),
    )
}

pub fn gm_check(cfg: &mut RunConfig) -> Result<Outcome> {
    let g = bv(cfg)?;
    let d = dimension(cfg);
    let opts = gm_options(cfg);
    let grid = match &cfg.grid {
        Some(s) => parse_grid(s)?,
        None => default_gm_grid(),
    };
    let membership = check_gm_d(&g, d, &grid, &opts)?;
    let (gm_pass, gm) = match cfg.c {
        Some(c) => {
            let r = check_gm(&g, c, &grid, &opts)?;
            (r.pass(), serde_json::to_value(&r)?)
        }
        None => {
            let r = gm_scan(&g, &DEFAULT_C_SCAN, &grid, &opts)?;
            (r.smallest_passing_c.is_some(), serde_json::to_value(&r)?)
        }
    };
    Outcome::new(
        gm_pass && membership.pass,
        json!({ "label": g.label, "gm": gm, "gm_d": membership }),
    )
}

pub fn gm_build(cfg: &mut RunConfig) -> Result<Outcome> {
    let g = bv(cfg)?;
    let d = dimension(cfg);
    let p = *cfg.p.get_or_insert(2.0);
    let built = build_gm_pair(&g, d, p, &gm_options(cfg))?;
    let mut result = serde_json::to_value(&built)?;
    if let Some(dir) = &cfg.csv {
        std::fs::create_dir_all(dir)?;
        let grid = profile_grid();
        let space = dir.join("space.csv");
        let fourier = dir.join("fourier.csv");
        write_profile(&built.pair.space, &grid, &space)?;
        write_profile(&built.pair.fourier, &grid, &fourier)?;
        result["profiles"] = json!([display(&space), display(&fourier)]);
    }
    Outcome::new(built.membership.pass, result)
}

pub fn rl_bound(cfg: &mut RunConfig) -> Result<Outcome> {
    let g = bv(cfg)?;
    let d = dimension(cfg);
    let p = *cfg.p.get_or_insert(2.0);
    let q = *cfg.q.get_or_insert(2.0);
    let c = *cfg.c.get_or_insert(2.0);
    let phi = majorant(cfg)?;
    let grid = grid_or(cfg, "10:1e3:4")?;
    let s = settings(cfg);
    let built = build_gm_pair(&g, d, p, &gm_options(cfg))?;
    let r = riemann_lebesgue_bound(&built, q, &phi, &grid, c, &s)?;
    Outcome::new(r.pointwise.pass() && r.holder.pass, r)
}

pub fn counterexample(cfg: &mut RunConfig) -> Result<Outcome> {
    let beta = *cfg.beta.get_or_insert(0.5);
    let p = *cfg.p.get_or_insert(2.0);
    let d = dimension(cfg);
    let schedule = match &cfg.grid {
        Some(g) => parse_grid(g)?,
        None => default_schedule(),
    };
    let r = counterexample_remark(beta, p, d, &schedule, &settings(cfg))?;
    Outcome::new(r.reproduced, r)
}

pub fn catalog_list() -> Result<Outcome> {
    Outcome::new(true, list_catalog())
}

/// `[0] ∪ log_grid(1e-3, 64, 16)`.
fn profile_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain(log_grid(1e-3, 64.0, 16))
        .collect()
}

fn display(p: &std::path::Path) -> String {
    p.display().to_string()
}

pub fn catalog_dump(cfg: &mut RunConfig, name: &str) -> Result<Outcome> {
    let (entry, params) = parse_named(name, "name")?;
    let d_min = list_catalog()
        .iter()
        .find(|e| e.name == entry)
        .map(|e| e.d_min)
        .ok_or_else(|| Error::Unknown {
            kind: "catalog entry".into(),
            name: entry.clone(),
        })?;
    cfg.pair = Some(name.to_string());
    let d = *cfg.d.get_or_insert(d_min.max(1));
    let dir: PathBuf = cfg.csv.get_or_insert_with(|| PathBuf::from(".")).clone();
    std::fs::create_dir_all(&dir)?;
    let pair = get_pair_with(&entry, d, &params, &QuadratureSpec::default())?;
    let grid = profile_grid();
    let space = dir.join(format!("{entry}_d{d}_space.csv"));
    let fourier = dir.join(format!("{entry}_d{d}_fourier.csv"));
    write_profile(&pair.space, &grid, &space)?;
    write_profile(&pair.fourier, &grid, &fourier)?;
    Outcome::new(
        true,
        json!({
            "name": entry,
            "d": d,
            "provenance": pair.provenance,
            "files": [display(&space), display(&fourier)],
        }),
    )
}
