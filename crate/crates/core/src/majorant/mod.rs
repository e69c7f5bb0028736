//! Majorant functions and empirical membership in the classes `M`, `Ω_β`,
//! `Ω'_β`, `Ω_β^q` and regular variation.

mod catalog;
mod checks;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::BoundReport;

pub use catalog::{catalog_majorants, majorant_by_name, parse_majorant, CatalogMajorant};
pub use checks::{
    check_almost_decreasing, check_m, check_omega, check_omega_q, default_deltas,
    default_large_grid, default_small_grid, estimate_rv_index, large_grid_for, omega_equivalence,
    EquivalenceReport, OmegaOptions, RvEstimate, OMEGA_HORIZON,
};

/// Log–log linearly interpolated samples on a closed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSamples {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl LogSamples {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::param(
                "samples",
                "need at least two (x, y) pairs of equal length",
            ));
        }
        if !(x[0] > 0.0) || x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::param(
                "samples",
                "abscissae must be positive and strictly increasing",
            ));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::param(
                "samples",
                format!("value at x = {} is negative or not finite", x[i]),
            ));
        }
        Ok(Self { x, y })
    }

    fn eval(&self, t: f64) -> f64 {
        let k = self.x.partition_point(|&v| v <= t);
        if k == 0 {
            return self.y[0];
        }
        if k == self.x.len() {
            return self.y[k - 1];
        }
        let (x0, x1, y0, y1) = (self.x[k - 1], self.x[k], self.y[k - 1], self.y[k]);
        if y0 > 0.0 && y1 > 0.0 {
            let s = (t / x0).ln() / (x1 / x0).ln();
            (y0.ln() + s * (y1 / y0).ln()).exp()
        } else {
            y0 + (t - x0) / (x1 - x0) * (y1 - y0)
        }
    }
}

/// Evaluable nonnegative function on (part of) the positive half-axis.
#[derive(Clone)]
pub enum PosFunc {
    /// `t^α`
    Power {
        alpha: f64,
    },
    /// `t^α ln(1+t)`
    PowerLog {
        alpha: f64,
    },
    /// `(t ln(1+t))^α`
    PowerLogPow {
        alpha: f64,
    },
    /// `t^α ln(ln(e+t))`
    LogLog {
        alpha: f64,
    },
    /// `t^α exp(ln t / ln ln t)`, `t > e`
    ExpLogRatio {
        alpha: f64,
    },
    /// `t^α exp(Π_i (log_i t)^(α_i))` with `log_1 = ln`, `log_{i+1} = ln ∘ log_i`
    IteratedLog {
        alpha: f64,
        exponents: Vec<f64>,
    },
    Constant {
        value: f64,
    },
    /// `ln(e+t)`
    LogShift,
    /// `φ(t)^q`
    Powered {
        base: Box<PosFunc>,
        q: f64,
    },
    Sampled(LogSamples),
    Custom {
        label: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lo: f64,
        hi: f64,
    },
}

impl fmt::Debug for PosFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `E_0 = 1`, `E_k = exp(E_{k-1})`.
fn tower(k: usize) -> f64 {
    (0..k).fold(1.0, |acc, _| f64::exp(acc))
}

impl PosFunc {
    pub fn power(alpha: f64) -> Self {
        PosFunc::Power { alpha }
    }

    pub fn powered(self, q: f64) -> Self {
        PosFunc::Powered {
            base: Box::new(self),
            q,
        }
    }

    pub fn custom(
        label: &str,
        lo: f64,
        hi: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PosFunc::Custom {
            label: label.to_string(),
            f: Arc::new(f),
            lo,
            hi,
        }
    }

    /// Open interval `(lo, hi)` for closed forms, closed for samples.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            PosFunc::ExpLogRatio { .. } => (std::f64::consts::E, f64::INFINITY),
            PosFunc::IteratedLog { exponents, .. } => {
                (tower(exponents.len().saturating_sub(1)), f64::INFINITY)
            }
            PosFunc::Powered { base, .. } => base.domain(),
            PosFunc::Sampled(s) => (s.x[0], *s.x.last().expect("nonempty samples")),
            PosFunc::Custom { lo, hi, .. } => (*lo, *hi),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.domain();
        match self {
            PosFunc::Sampled(_) => t >= lo && t <= hi,
            PosFunc::Powered { base, .. } => base.contains(t),
            _ => t > lo && t < hi,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !self.contains(t) {
            let (lo, hi) = self.domain();
            return Err(Error::OutOfDomain { t, lo, hi });
        }
        let v = match self {
            PosFunc::Power { alpha } => t.powf(*alpha),
            PosFunc::PowerLog { alpha } => t.powf(*alpha) * t.ln_1p(),
            PosFunc::PowerLogPow { alpha } => (t * t.ln_1p()).powf(*alpha),
            PosFunc::LogLog { alpha } => t.powf(*alpha) * (std::f64::consts::E + t).ln().ln(),
            PosFunc::ExpLogRatio { alpha } => {
                let l = t.ln();
                t.powf(*alpha) * (l / l.ln()).exp()
            }
            PosFunc::IteratedLog { alpha, exponents } => {
                let mut l = t;
                let mut prod = 1.0;
                for a in exponents {
                    l = l.ln();
                    prod *= l.powf(*a);
                }
                t.powf(*alpha) * prod.exp()
            }
            PosFunc::Constant { value } => *value,
            PosFunc::LogShift => (std::f64::consts::E + t).ln(),
            PosFunc::Powered { base, q } => base.eval(t)?.powf(*q),
            PosFunc::Sampled(s) => s.eval(t),
            PosFunc::Custom { f, .. } => f(t),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::non_finite("majorant", t))
        }
    }

    pub fn label(&self) -> String {
        match self {
            PosFunc::Power { alpha } => format!("power(alpha={alpha})"),
            PosFunc::PowerLog { alpha } => format!("power_log(alpha={alpha})"),
            PosFunc::PowerLogPow { alpha } => format!("power_log_pow(alpha={alpha})"),
            PosFunc::LogLog { alpha } => format!("loglog(alpha={alpha})"),
            PosFunc::ExpLogRatio { alpha } => format!("exp_log_ratio(alpha={alpha})"),
            PosFunc::IteratedLog { alpha, exponents } => {
                format!("iterated_log(alpha={alpha}, exponents={exponents:?})")
            }
            PosFunc::Constant { value } => format!("constant({value})"),
            PosFunc::LogShift => "log_shift".into(),
            PosFunc::Powered { base, q } => format!("({})^{q}", base.label()),
            PosFunc::Sampled(s) => format!("sampled({} points)", s.x.len()),
            PosFunc::Custom { label, .. } => label.clone(),
        }
    }

    /// Leading power, when the function is a power law up to a slowly varying factor.
    pub fn power_index(&self) -> Option<f64> {
        match self {
            PosFunc::Power { alpha }
            | PosFunc::LogLog { alpha }
            | PosFunc::ExpLogRatio { alpha }
            | PosFunc::IteratedLog { alpha, .. } => Some(*alpha),
            PosFunc::PowerLogPow { alpha } => Some(*alpha),
            PosFunc::Constant { .. } | PosFunc::LogShift => Some(0.0),
            PosFunc::Powered { base, q } => base.power_index().map(|a| a * q),
            _ => None,
        }
    }
}

/// A majorant with the evidence gathered for it.
#[derive(Debug, Clone)]
pub struct Majorant {
    pub func: PosFunc,
    pub checked_m: Option<BoundReport>,
    pub checked_omega: Vec<(f64, BoundReport)>,
    pub checked_omega_q: Vec<((f64, f64), BoundReport)>,
}

impl Majorant {
    pub fn new(func: PosFunc) -> Self {
        Self {
            func,
            checked_m: None,
            checked_omega: Vec::new(),
            checked_omega_q: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.func.eval(t)
    }

    pub fn omega(&self, beta: f64) -> Option<&BoundReport> {
        self.checked_omega
            .iter()
            .find(|(b, _)| *b == beta)
            .map(|(_, r)| r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(PosFunc::power(0.5).eval(4.0).unwrap(), 2.0);
        let e = std::f64::consts::E;
        assert_relative_eq!(
            PosFunc::PowerLog { alpha: 1.0 }.eval(e - 1.0).unwrap(),
            e - 1.0,
            max_relative = 1e-15
        );
        let t = e.powf(e) - e;
        assert_relative_eq!(
            PosFunc::LogLog { alpha: 0.5 }.eval(t).unwrap(),
            t.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn open_domains() {
        assert!(PosFunc::PowerLog { alpha: 1.0 }.eval(0.0).is_err());
        assert!(PosFunc::ExpLogRatio { alpha: 0.5 }.eval(2.0).is_err());
        let it = PosFunc::IteratedLog {
            alpha: 0.5,
            exponents: vec![0.5, 0.5, 0.5],
        };
        assert!(it.eval(10.0).is_err());
        assert!(it.eval(20.0).is_ok());
    }

    #[test]
    fn sampled_interpolation() {
        let s = PosFunc::Sampled(LogSamples::new(vec![1.0, 10.0], vec![2.0, 20.0]).unwrap());
        assert_relative_eq!(
            s.eval(10f64.sqrt()).unwrap(),
            2.0 * 10f64.sqrt(),
            max_relative = 1e-14
        );
        assert!(s.eval(0.5).is_err());
        assert!(s.eval(11.0).is_err());
        assert_eq!(s.eval(10.0).unwrap(), 20.0);
    }

    proptest! {
        #[test]
        fn sampled_power_law_is_exact(alpha in -2.0f64..3.0, t in 1.0f64..1000.0) {
            let x: Vec<f64> = (0..7).map(|k| 10f64.powf(0.5 * f64::from(k))).collect();
            let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(alpha)).collect();
            let s = PosFunc::Sampled(LogSamples::new(x, y).unwrap());
            let got = s.eval(t).unwrap();
            prop_assert!((got / (3.0 * t.powf(alpha)) - 1.0).abs() < 1e-12);
        }
    }
}
