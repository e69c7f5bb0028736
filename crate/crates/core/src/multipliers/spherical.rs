//! The fractional spherical-mean combination `V_{r,t}` and its multiplier
//! `m_r`, computed either as a weighted sum of spherical-mean multipliers or
//! from a single integral over `[0, 1]`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::quad::rule;
use crate::radial::radial_kernel;

/// Hard cap on the number of combination weights.
pub const MAX_WEIGHTS: usize = 1_000_000;

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// `(ln|Γ(x)|, sign Γ(x))` away from the poles.
fn signed_ln_gamma(x: f64) -> (f64, f64) {
    if x >= 0.5 {
        (ln_gamma(x), 1.0)
    } else {
        let s = (PI * x).sin();
        (PI.ln() - s.abs().ln() - ln_gamma(1.0 - x), s.signum())
    }
}

/// `Γ(r+1) / (Γ(s+1) Γ(r-s+1))`, zero whenever a denominator argument is a pole.
pub fn gen_binomial(r: f64, s: f64) -> f64 {
    let (a, b, c) = (r + 1.0, s + 1.0, r - s + 1.0);
    if is_pole(b) || is_pole(c) {
        return 0.0;
    }
    if is_pole(a) {
        return f64::NAN;
    }
    if r.fract() == 0.0 && s.fract() == 0.0 && r < 1e3 {
        let k = s.min(r - s) as u32;
        return (1..=k).fold(1.0, |acc, i| {
            acc * (r - f64::from(k) + f64::from(i)) / f64::from(i)
        });
    }
    if a.abs() < 150.0 && b.abs() < 150.0 && c.abs() < 150.0 {
        return gamma(a) / (gamma(b) * gamma(c));
    }
    let (la, sa) = signed_ln_gamma(a);
    let (lb, sb) = signed_ln_gamma(b);
    let (lc, sc) = signed_ln_gamma(c);
    sa * sb * sc * (la - lb - lc).exp()
}

/// Combination weights `w_k = -2 (-1)^k C(2r, r-k) / C(2r, r)`, `k >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub r: f64,
    /// `weights[k-1] = w_k`.
    pub weights: Vec<f64>,
    /// `Σ_{k>K} |w_k|` for the dropped terms (exact, zero for integer `r`).
    pub tail_bound: f64,
    /// Sign shared by all dropped terms.
    pub tail_sign: f64,
}

impl Weights {
    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn pairs(&self) -> Vec<(usize, f64)> {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| (i + 1, *w))
            .collect()
    }
}

/// Weights until `|w_k| < tol` (integer `r` stops exactly at `k = r`).
///
/// Uses `w_1 = 2r/(r+1)` and `w_{k+1} = -w_k (r-k)/(r+k+1)`; beyond `k > r`
/// the terms share one sign and `Σ_{k>K} |w_k| = |w_{K+1}| (K+1+r) / (2r)`.
pub fn combination_weights(r: f64, tol: f64) -> Result<Weights> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::param("r", "must be positive and finite"));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tolerance", "must be positive"));
    }
    let integer = r.fract() == 0.0;
    let mut weights = Vec::new();
    let mut w = 2.0 * r / (r + 1.0);
    let mut k = 1usize;
    loop {
        let kf = k as f64;
        weights.push(w);
        let next = -w * (r - kf) / (r + kf + 1.0);
        if integer && kf >= r {
            return Ok(Weights {
                r,
                weights,
                tail_bound: 0.0,
                tail_sign: 1.0,
            });
        }
        if kf > r && next.abs() < tol {
            return Ok(Weights {
                r,
                weights,
                tail_bound: next.abs() * (kf + 1.0 + r) / (2.0 * r),
                tail_sign: next.signum(),
            });
        }
        if k >= MAX_WEIGHTS {
            return Err(Error::TruncationCap { cap: MAX_WEIGHTS });
        }
        w = next;
        k += 1;
    }
}

/// A truncated series value with its truncation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub truncation_bound: f64,
}

/// `m_r(u) = Σ_k w_k j_{d/2-1}(k u)`.
pub fn m_r_series(r: f64, d: u32, u: f64, tol: f64) -> Result<SeriesValue> {
    let w = combination_weights(r, tol)?;
    m_r_series_with(&w, d, u)
}

pub fn m_r_series_with(w: &Weights, d: u32, u: f64) -> Result<SeriesValue> {
    if d < 2 {
        return Err(Error::param("d", "spherical means need d >= 2"));
    }
    if !(u >= 0.0) {
        return Err(Error::param("u", "must be nonnegative"));
    }
    let value = w
        .weights
        .iter()
        .enumerate()
        .map(|(i, wk)| wk * radial_kernel(d, (i + 1) as f64 * u))
        .sum();
    Ok(SeriesValue {
        value,
        truncation_bound: w.tail_bound,
    })
}

/// Exponent of `(1 - s²)` in the integral route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExponentMode {
    /// `(d-3)/2`, normalized so that `r = 1` reproduces `j_{d/2-1}`.
    #[default]
    Corrected,
    /// `(d-1)/2` with the displayed constant, reading its `m` as `d`.
    AsPrinted,
}

impl ExponentMode {
    fn exponent(self, d: u32) -> f64 {
        let d = f64::from(d);
        match self {
            ExponentMode::Corrected => (d - 3.0) / 2.0,
            ExponentMode::AsPrinted => (d - 1.0) / 2.0,
        }
    }
}

/// `∫_0^1 |sin(us/2)|^(2r) (1-s²)^e ds` with `s = sin θ`, split at the zeros
/// of the sine.
fn sine_power_integral(r: f64, e: f64, u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let half_pi = 0.5 * PI;
    let mut edges = vec![0.0];
    let mut k = 1.0;
    while 2.0 * PI * k < u {
        edges.push((2.0 * PI * k / u).asin());
        k += 1.0;
    }
    edges.push(half_pi);
    let gl = rule(20);
    let weight = 2.0 * e + 1.0;
    let f = |th: f64| {
        let (s, c) = th.sin_cos();
        let v = (0.5 * u * s).sin().abs().powf(2.0 * r);
        Ok(if weight == 0.0 { v } else { v * c.powf(weight) })
    };
    let mut acc = 0.0;
    for w in edges.windows(2) {
        // Extra subdivision resolves the slow part of a long first panel.
        let pieces = ((w[1] - w[0]) / 0.2).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / pieces as f64;
        for j in 0..pieces {
            let a = w[0] + h * j as f64;
            acc += gl.integrate(a, a + h, f).expect("integrand is infallible");
        }
    }
    acc
}

/// `c_d` with `1 - j_{d/2-1}(u) = 2 c_d ∫_0^1 sin²(us/2) (1-s²)^((d-3)/2) ds`,
/// fitted numerically once per dimension.
pub fn calibration_constant(d: u32) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u32, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().expect("calibration cache poisoned").get(&d) {
        return Ok(*c);
    }
    if d < 2 {
        return Err(Error::param("d", "spherical means need d >= 2"));
    }
    let e = ExponentMode::Corrected.exponent(d);
    let fit = |u: f64| (1.0 - radial_kernel(d, u)) / (2.0 * sine_power_integral(1.0, e, u));
    let c = fit(1.0);
    let check = fit(3.7);
    let nu = f64::from(d) / 2.0 - 1.0;
    let analytic = 2.0 * gamma(nu + 1.0) / (PI.sqrt() * gamma(nu + 0.5));
    if (check / c - 1.0).abs() > 1e-9 || (c / analytic - 1.0).abs() > 1e-9 {
        return Err(Error::Calibration(format!(
            "d = {d}: fitted {c} and {check}, expected {analytic}"
        )));
    }
    cache
        .lock()
        .expect("calibration cache poisoned")
        .insert(d, c);
    Ok(c)
}

/// `1 - m_r(u)` from the integral route.
pub fn spherical_defect(r: f64, d: u32, u: f64, mode: ExponentMode) -> Result<f64> {
    if d < 2 {
        return Err(Error::param("d", "spherical means need d >= 2"));
    }
    if !(r > 0.0) {
        return Err(Error::param("r", "must be positive"));
    }
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::param("u", "must be finite and nonnegative"));
    }
    let central = gen_binomial(2.0 * r, r);
    let norm = match mode {
        ExponentMode::Corrected => calibration_constant(d)? * 4f64.powf(r) / central,
        ExponentMode::AsPrinted => {
            let df = f64::from(d);
            2f64.powf(2.0 * r + 1.0) * gamma((df + 1.0) / 2.0)
                / (central * gamma(df / 2.0) * PI.sqrt())
        }
    };
    Ok(norm * sine_power_integral(r, mode.exponent(d), u))
}

/// `m_r(u)` from the integral route.
pub fn m_r_integral(r: f64, d: u32, u: f64, mode: ExponentMode) -> Result<f64> {
    Ok(1.0 - spherical_defect(r, d, u, mode)?)
}
