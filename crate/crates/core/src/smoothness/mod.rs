//! Generalized Lipschitz and Besov smoothness against Fourier-side decay:
//! dyadic shell and tail conditions, the two-sided multiplier estimate, the
//! Titchmarsh-type implications and the counterexample showing that the
//! `Ω_{2β}` hypothesis cannot be dropped.
//!
//! Implications are reported with every constant that enters the chain, so a
//! pass is always a quantitative statement.

pub(crate) mod besov;
pub(crate) mod lipschitz;
mod remark;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorant::{check_omega, large_grid_for, OmegaOptions, PosFunc};
use crate::quad::{log_grid, QuadratureSpec};
use crate::report::BoundReport;

pub use besov::{
    besov_functional, besov_norm, besov_spectral_functional, theorem_besov, BesovImplication,
    BesovInput, BesovValue, Direction, SpectralMode,
};
pub use lipschitz::{
    lemma_equivalence, lip_check, shell_decay_check, tail_decay_check, titchmarsh_backward,
    titchmarsh_forward, titchmarsh_iff, two_sided_estimate, Congruence, IffReport, LemmaReport,
    TwoSidedReport,
};
pub use remark::{counterexample_remark, default_schedule, RemarkReport};

/// Exponents `p`, `q` in `(1, ∞)` and the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub p: f64,
    pub q: f64,
    pub d: u32,
}

const RANGE_SLACK: f64 = 1e-12;

impl RatePair {
    pub fn new(p: f64, q: f64, d: u32) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::param("p", "must lie in (1, ∞)"));
        }
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::param("q", "must lie in (1, ∞)"));
        }
        if d == 0 {
            return Err(Error::param("d", "dimension must be at least 1"));
        }
        Ok(Self { p, q, d })
    }

    /// `p' = p / (p - 1)`.
    pub fn conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Spectral weight exponent `d (1 - 1/p - 1/q)`.
    pub fn weight(&self) -> f64 {
        f64::from(self.d) * (1.0 - 1.0 / self.p - 1.0 / self.q)
    }

    /// `1 < p <= 2` and `p <= q <= p'`.
    pub fn forward_ok(&self) -> bool {
        let pc = self.conjugate();
        self.p <= 2.0 + RANGE_SLACK && self.q >= self.p - RANGE_SLACK && self.q <= pc + RANGE_SLACK
    }

    /// `2 <= p < ∞` and `p' <= q <= p`.
    pub fn backward_ok(&self) -> bool {
        let pc = self.conjugate();
        self.p >= 2.0 - RANGE_SLACK && self.q >= pc - RANGE_SLACK && self.q <= self.p + RANGE_SLACK
    }

    pub fn is_l2(&self) -> bool {
        self.p == 2.0 && self.q == 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `t → 0⁺`
    Small,
    /// `t → ∞`
    Large,
}

/// A [`BoundReport`] tagged with the limit it probes and the preconditions
/// checked before computing it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticVerdict {
    pub regime: Regime,
    #[serde(flatten)]
    pub report: BoundReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub preconditions: Vec<Check>,
}

impl AsymptoticVerdict {
    pub fn pass(&self) -> bool {
        self.report.pass
    }

    pub fn constant(&self) -> f64 {
        self.report.ratio_sup
    }
}

/// Outcome of one precondition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Numerical settings shared by the smoothness routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub quad: QuadratureSpec,
    /// Ratio threshold for `O(·)` verdicts.
    pub threshold: f64,
    /// Refuse to compute when a precondition fails. Turning this off keeps
    /// the failed checks in the report and computes anyway.
    pub enforce: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            quad: QuadratureSpec::default(),
            threshold: 1e3,
            enforce: true,
        }
    }
}

impl Settings {
    pub(crate) fn gate(&self, checks: &[Check]) -> Result<()> {
        match checks.iter().find(|c| !c.pass) {
            Some(c) if self.enforce => {
                Err(Error::precondition(format!("{}: {}", c.name, c.detail)))
            }
            _ => Ok(()),
        }
    }
}

/// `log_grid(1e-3, 1e-1, 8)`, the default `t → 0⁺` grid.
pub fn default_t_grid() -> Vec<f64> {
    log_grid(1e-3, 1e-1, 8)
}

/// Reciprocals of `grid`, increasing.
pub fn reciprocal_grid(grid: &[f64]) -> Vec<f64> {
    grid.iter().rev().map(|t| 1.0 / t).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Hypothesis and conclusion hold with a consistent constant chain.
    Holds,
    /// Hypothesis holds, conclusion (or its constant) does not.
    Violated,
    /// Hypothesis fails; nothing is asserted.
    Vacuous,
}

/// Hypothesis, conclusion and the constants linking them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImplicationReport {
    pub statement: String,
    pub hypothesis: AsymptoticVerdict,
    pub conclusion: Option<AsymptoticVerdict>,
    /// Bound on the conclusion constant implied by the hypothesis constant.
    pub chain_constant: Option<f64>,
    pub constants: BTreeMap<String, f64>,
    pub preconditions: Vec<Check>,
    pub status: Status,
    /// Intermediate tables the chain was assembled from.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tables: BTreeMap<String, BoundReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ImplicationReport {
    pub fn holds(&self) -> bool {
        self.status != Status::Violated
    }
}

/// `φ ∈ Ω_β` on the large-argument grid, as a precondition record.
pub(crate) fn omega_check(phi: &PosFunc, beta: f64, quad: &QuadratureSpec) -> Result<Check> {
    let r = check_omega(
        phi,
        beta,
        &large_grid_for(phi),
        &OmegaOptions::default(),
        quad,
    )?;
    Ok(Check::new(
        &format!("φ in Ω_{beta}"),
        r.pass,
        format!(
            "{}: ratio_sup {:e}, verdict {:?}",
            phi.label(),
            r.ratio_sup,
            r.verdict
        ),
    ))
}

pub(crate) fn validate_t_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || !(grid[0] > 0.0) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param(
            "grid",
            "must be positive and strictly increasing",
        ));
    }
    Ok(())
}

/// Relative tolerance when comparing measured constants with a chain bound.
pub(crate) const CHAIN_SLACK: f64 = 1e-6;
