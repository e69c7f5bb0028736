//! Normalized Bessel functions `j_ν(u) = Γ(ν+1) (u/2)^(-ν) J_ν(u)`.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Below this argument the power series is used for generic orders.
const SERIES_SWITCH: f64 = 12.0;

/// `j_ν(u)` for `ν >= -1/2`, `u >= 0`; `j_ν(0) = 1`.
pub fn normalized_bessel(nu: f64, u: f64) -> Result<f64> {
    if !(nu >= -0.5) {
        return Err(Error::param("nu", format!("order {nu} below -1/2")));
    }
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::param(
            "u",
            format!("argument {u} must be finite and nonnegative"),
        ));
    }
    Ok(jnu(nu, u))
}

/// Unchecked kernel; callers guarantee `nu >= -1/2`, `u >= 0`.
pub(crate) fn jnu(nu: f64, u: f64) -> f64 {
    if u == 0.0 {
        return 1.0;
    }
    if nu == -0.5 {
        return u.cos();
    }
    if nu == 0.5 {
        return sinc(u);
    }
    let twice = 2.0 * nu;
    if twice.fract() == 0.0 && twice as i64 % 2 == 1 {
        return half_integer(nu, u);
    }
    if u <= switch_point(nu) {
        series(nu, u)
    } else {
        gamma(nu + 1.0) * (2.0 / u).powf(nu) * hankel_asymptotic(nu, u)
    }
}

/// The kernel of the radial Fourier transform in dimension `d`.
pub fn radial_kernel(d: u32, u: f64) -> f64 {
    jnu(f64::from(d) / 2.0 - 1.0, u)
}

fn switch_point(nu: f64) -> f64 {
    SERIES_SWITCH.max(nu * nu + 2.0 * nu)
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// `Σ_k (-u²/4)^k Γ(ν+1) / (k! Γ(ν+k+1))`.
fn series(nu: f64, u: f64) -> f64 {
    let x = -0.25 * u * u;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..500 {
        let k = f64::from(k);
        term *= x / ((k + 1.0) * (nu + k + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `J_ν(u)` from the Hankel expansion, truncated at its smallest term.
fn hankel_asymptotic(nu: f64, u: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = f64::from(k);
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * u);
        if a.abs() > last || a == 0.0 {
            break;
        }
        last = a.abs();
        // a_k (-1)^floor(k/2), split by parity.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = u - (0.5 * nu + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * u)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Orders `n + 1/2` via spherical Bessel functions: `j = (2n+1)!! y_n(u) / u^n`.
fn half_integer(nu: f64, u: f64) -> f64 {
    let n = (nu - 0.5).round() as u32;
    if u < f64::from(n) + 10.0 {
        return series(nu, u);
    }
    let (s, c) = u.sin_cos();
    let mut y0 = s / u;
    let mut y1 = s / (u * u) - c / u;
    for k in 1..n {
        let y2 = f64::from(2 * k + 1) / u * y1 - y0;
        y0 = y1;
        y1 = y2;
    }
    let mut scale = 1.0;
    for k in 1..=n {
        scale *= f64::from(2 * k + 1) / u;
    }
    scale * y1
}

/// Surface measure of the unit sphere in `R^d`: `2 π^(d/2) / Γ(d/2)`.
pub fn sphere_area(d: u32) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => {
            let h = f64::from(d) / 2.0;
            2.0 * std::f64::consts::PI.powf(h) / gamma(h)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// `j_ν(u) = (1/A) ∫_0^1 (1-s²)^(ν-1/2) cos(us) ds`, with `s = sin θ`.
    fn poisson_oracle(nu: f64, u: f64) -> f64 {
        let a = PI.sqrt() * gamma(nu + 0.5) / (2.0 * gamma(nu + 1.0));
        let panels = 400;
        let gl = crate::quad::rule(20);
        let h = 0.5 * PI / panels as f64;
        let mut acc = 0.0;
        for i in 0..panels {
            let lo = i as f64 * h;
            acc += gl
                .integrate(lo, lo + h, |t| {
                    Ok(t.cos().powf(2.0 * nu) * (u * t.sin()).cos())
                })
                .unwrap();
        }
        acc / a
    }

    #[test]
    fn value_at_origin() {
        for nu in [-0.5, 0.0, 0.3, 0.5, 1.0, 2.5, 7.0] {
            assert_eq!(normalized_bessel(nu, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn closed_forms() {
        assert_abs_diff_eq!(normalized_bessel(0.5, PI).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            normalized_bessel(-0.5, 2.0).unwrap(),
            2f64.cos(),
            epsilon = 1e-15
        );
        let u = 7.3f64;
        let ball = 3.0 * (u.sin() - u * u.cos()) / u.powi(3);
        assert_abs_diff_eq!(normalized_bessel(1.5, u).unwrap(), ball, epsilon = 1e-14);
    }

    #[test]
    fn first_zero_of_j0() {
        let (mut a, mut b) = (2.0, 3.0);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if jnu(0.0, a) * jnu(0.0, m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        assert_abs_diff_eq!(a, 2.404_825_557_695_773, epsilon = 1e-10);
        assert_abs_diff_eq!(jnu(0.0, 2.404826), 0.0, epsilon = 1e-5);
    }

    #[test]
    fn matches_poisson_integral() {
        for nu in [0.0, 1.0, 1.5, 2.0, 2.3, 2.5, 3.7] {
            for u in [0.1, 1.0, 5.0, 11.9, 12.1, 17.0, 25.0, 40.0, 80.0] {
                let got = normalized_bessel(nu, u).unwrap();
                assert_abs_diff_eq!(got, poisson_oracle(nu, u), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn rejects_low_order() {
        assert!(normalized_bessel(-0.6, 1.0).is_err());
        assert!(normalized_bessel(0.0, -1.0).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(1), 2.0);
        assert_abs_diff_eq!(sphere_area(2), 2.0 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(sphere_area(3), 4.0 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(sphere_area(4), 2.0 * PI * PI, epsilon = 1e-13);
        assert_abs_diff_eq!(sphere_area(5), 8.0 * PI * PI / 3.0, epsilon = 1e-13);
    }

    proptest! {
        #[test]
        fn bounded_by_one(nu in -0.5f64..6.0, u in 0.0f64..200.0) {
            prop_assert!(jnu(nu, u).abs() <= 1.0 + 1e-12);
        }

        #[test]
        fn continuous_across_series_switch(nu in prop::sample::select(vec![0.0, 1.0, 2.0, 0.3])) {
            let s = switch_point(nu);
            let below = jnu(nu, s * (1.0 - 1e-12));
            let above = jnu(nu, s * (1.0 + 1e-12));
            prop_assert!((below - above).abs() < 1e-10);
        }
    }
}
