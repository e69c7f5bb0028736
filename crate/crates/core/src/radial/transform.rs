use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bessel::{jnu, sphere_area};
use super::profile::{RadialProfile, Samples, Shape, Side};
use crate::error::{Error, Result};
use crate::quad::{self, log_grid, Mesh, QuadratureSpec, TailIntegral, WidthCap};

/// `σ_{d-1}` for the forward map, `σ_{d-1} / (2π)^d` for the inverse.
pub fn transform_constant(d: u32, from: Side) -> f64 {
    let sigma = sphere_area(d);
    match from {
        Side::Space => sigma,
        Side::Fourier => sigma / (2.0 * std::f64::consts::PI).powi(d as i32),
    }
}

fn profile_mesh(shape: &Shape) -> Mesh {
    Mesh::new(shape.breaks(), shape.cap())
}

/// Radial transform of `g` evaluated at the single radius `s`.
///
/// Compactly supported profiles are integrated exactly over their support.
/// Otherwise the integral is extended decade by decade; a decade is skipped
/// once `∫ r^(d-1) |g|` over it is negligible, since `|j| <= 1`.
pub fn transform_at(g: &RadialProfile, s: f64, quad: &QuadratureSpec) -> Result<f64> {
    if g.shape.is_zero() {
        return Ok(0.0);
    }
    let d = g.d;
    let nu = f64::from(d) / 2.0 - 1.0;
    let dm1 = (d - 1) as i32;
    let c = transform_constant(d, g.side);
    let kernel_mesh = profile_mesh(&g.shape).with_cap(WidthCap::quarter_period(s));
    let integrand = |r: f64| Ok(r.powi(dm1) * g.shape.eval(r)? * jnu(nu, r * s));

    if let Some(support) = g.shape.support() {
        return Ok(c * quad::integrate(integrand, 0.0, support, quad, &kernel_mesh)?);
    }

    let abs_mesh = profile_mesh(&g.shape);
    let abs_integrand = |r: f64| Ok(r.powi(dm1) * g.shape.eval(r)?.abs());
    let mut horizon = quad.r_max;
    let mut value = quad::integrate(integrand, 0.0, horizon, quad, &kernel_mesh)?;
    let mut last_piece = f64::INFINITY;
    let mut alternating = false;
    for _ in 0..quad.max_decades {
        let next = horizon * 10.0;
        let bound = quad::integrate(abs_integrand, horizon, next, quad, &abs_mesh)?;
        if bound <= quad.target_tol * value.abs() || bound == 0.0 {
            return Ok(c * value);
        }
        let panels = match quad::panel_values(integrand, horizon, next, quad, &kernel_mesh) {
            Ok(p) => p,
            Err(Error::PanelCap { .. }) => break,
            Err(e) => return Err(e),
        };
        let piece: f64 = panels.iter().sum();
        let signs: Vec<f64> = panels
            .iter()
            .filter(|v| **v != 0.0)
            .map(|v| v.signum())
            .collect();
        let flips = signs.windows(2).filter(|w| w[0] != w[1]).count();
        alternating = flips * 4 >= signs.len();
        value += piece;
        last_piece = piece;
        if piece.abs() <= quad.target_tol * value.abs() {
            return Ok(c * value);
        }
        horizon = next;
    }
    let change = last_piece.abs() / value.abs().max(f64::MIN_POSITIVE);
    if change <= quad.probe_tol {
        return Ok(c * value);
    }
    let (base, probe) = (c * (value - last_piece), c * value);
    let what = format!("radial transform at {s}");
    Err(if alternating {
        Error::OscillatoryCancellation { what, base, probe }
    } else {
        Error::Divergent { what, base, probe }
    })
}

/// Transform of `g` sampled on `grid`; the result lives on the other side.
pub fn fourier_radial(
    g: &RadialProfile,
    grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<RadialProfile> {
    quad.validate()?;
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&s| transform_at(g, s, quad))
        .collect::<Result<_>>()?;
    Ok(RadialProfile {
        d: g.d,
        side: g.side.flip(),
        shape: Shape::Sampled(Samples::new(grid.to_vec(), values)?),
        provenance: "computed_by_transform".into(),
    })
}

/// Transform of `g` as a lazily evaluated profile.
pub fn fourier_radial_lazy(g: &RadialProfile, quad: &QuadratureSpec) -> RadialProfile {
    RadialProfile {
        d: g.d,
        side: g.side.flip(),
        shape: if g.shape.is_zero() {
            Shape::Zero
        } else {
            Shape::Transformed {
                source: std::sync::Arc::new(g.clone()),
                quad: *quad,
            }
        },
        provenance: "computed_by_transform".into(),
    }
}

/// Sampling density used by [`inverse_norm_probe`].
const PROBE_NODES_PER_DECADE: usize = 96;

/// `L^p` norms of the transform of `g` over `[0, r_max / 10]` and `[0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormProbe {
    pub p: f64,
    pub base: f64,
    pub full: f64,
    /// `|full - base| / full`.
    pub change: f64,
}

/// Samples the transform of `g` on `[0, r_max]` (log grid from `1e-4`) and
/// compares the `L^p` norm of the samples with the norm of their restriction
/// to `[0, r_max / 10]`.
pub fn inverse_norm_probe(g: &RadialProfile, p: f64, quad: &QuadratureSpec) -> Result<NormProbe> {
    let horizon = quad.r_max;
    let mut grid = vec![0.0];
    grid.extend(log_grid(1e-4, horizon, PROBE_NODES_PER_DECADE));
    let other = fourier_radial(g, &grid, quad)?;
    let full = radial_lp_norm(&other, p, quad)?;
    let cut = grid.partition_point(|&r| r <= horizon / 10.0);
    let head = RadialProfile {
        shape: Shape::Sampled(Samples::new(
            grid[..cut].to_vec(),
            other.sample(&grid[..cut])?,
        )?),
        ..other
    };
    let base = radial_lp_norm(&head, p, quad)?;
    let change = if full == 0.0 {
        0.0
    } else {
        (full - base).abs() / full
    };
    Ok(NormProbe {
        p,
        base,
        full,
        change,
    })
}

/// `σ_{d-1} ∫_a^∞ h(r) r^(d-1) dr` for a nonnegative radial integrand `h`.
fn radial_tail<F>(
    shape: &Shape,
    d: u32,
    a: f64,
    quad: &QuadratureSpec,
    h: F,
    what: &str,
) -> Result<TailIntegral>
where
    F: Fn(f64) -> Result<f64>,
{
    let sigma = sphere_area(d);
    let dm1 = (d - 1) as i32;
    let mesh = profile_mesh(shape);
    let f = |r: f64| Ok(r.powi(dm1) * h(r)?);
    let scaled = |t: TailIntegral| TailIntegral {
        value: sigma * t.value,
        base: sigma * t.base,
        ..t
    };
    if shape.is_zero() {
        return Ok(TailIntegral {
            value: 0.0,
            base: 0.0,
            rel_change: 0.0,
            horizon: a,
            extrapolated: false,
        });
    }
    if let Some(support) = shape.support() {
        let v = if support <= a {
            0.0
        } else {
            quad::integrate(f, a, support, quad, &mesh)?
        };
        return Ok(scaled(TailIntegral {
            value: v,
            base: v,
            rel_change: 0.0,
            horizon: support.max(a),
            extrapolated: false,
        }));
    }
    let start = if a > 0.0 { a } else { quad.r_max };
    Ok(scaled(quad::integrate_to_infinity(
        f, a, start, quad, &mesh, what,
    )?))
}

/// `(σ_{d-1} ∫ |g(r)|^p r^(d-1) dr)^(1/p)`; `p = ∞` takes the sup over a
/// log grid refined around the maximizer.
pub fn radial_lp_norm(g: &RadialProfile, p: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::param("p", "must lie in [1, ∞]"));
    }
    if g.shape.is_zero() {
        return Ok(0.0);
    }
    if p.is_infinite() {
        return sup_norm(g, quad);
    }
    let t = radial_tail(
        &g.shape,
        g.d,
        0.0,
        quad,
        |r| Ok(g.shape.eval(r)?.abs().powf(p)),
        "L^p norm",
    )?;
    Ok(t.value.powf(1.0 / p))
}

fn sup_norm(g: &RadialProfile, quad: &QuadratureSpec) -> Result<f64> {
    let hi = g
        .shape
        .support()
        .unwrap_or(quad.r_max)
        .min(quad.r_max)
        .max(quad.r_min * 10.0);
    let mut grid = vec![0.0];
    grid.extend(log_grid(quad.r_min, hi, quad.nodes_per_decade * 4));
    grid.extend(g.shape.breaks().into_iter().filter(|b| *b <= hi));
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    let vals = g.sample(&grid)?;
    let (imax, mut best) = vals
        .iter()
        .map(|v| v.abs())
        .enumerate()
        .fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    // Golden-section refinement between the neighbours of the maximizer.
    let (mut a, mut b) = (
        grid[imax.saturating_sub(1)],
        grid[(imax + 1).min(grid.len() - 1)],
    );
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        let (f1, f2) = (g.eval(x1)?.abs(), g.eval(x2)?.abs());
        best = best.max(f1).max(f2);
        if f1 >= f2 {
            b = x2;
        } else {
            a = x1;
        }
    }
    Ok(best)
}

fn check_shell_args(t: f64, q: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::param("t", "must be positive"));
    }
    if !(q >= 1.0) || q.is_infinite() {
        return Err(Error::param("q", "must be finite and at least 1"));
    }
    Ok(())
}

/// `(σ_{d-1} ∫_t^{2t} [s^w |F(s)|]^q s^(d-1) ds)^(1/q)`.
pub fn shell_integral(
    f: &RadialProfile,
    t: f64,
    w: f64,
    q: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_shell_args(t, q)?;
    if f.shape.is_zero() {
        return Ok(0.0);
    }
    let dm1 = (f.d - 1) as i32;
    let v = quad::integrate(
        |s| Ok(s.powi(dm1) * (s.powf(w) * f.shape.eval(s)?.abs()).powf(q)),
        t,
        2.0 * t,
        quad,
        &profile_mesh(&f.shape),
    )?;
    Ok((sphere_area(f.d) * v).powf(1.0 / q))
}

/// q-th power of [`tail_integral`], with the probe data.
pub fn tail_power(
    f: &RadialProfile,
    radius: f64,
    w: f64,
    q: f64,
    quad: &QuadratureSpec,
) -> Result<TailIntegral> {
    if !(radius >= 0.0) {
        return Err(Error::param("radius", "must be nonnegative"));
    }
    check_shell_args(1.0, q)?;
    radial_tail(
        &f.shape,
        f.d,
        radius,
        quad,
        |s| Ok((s.powf(w) * f.shape.eval(s)?.abs()).powf(q)),
        "tail integral",
    )
}

/// `(σ_{d-1} ∫_radius^∞ [s^w |F(s)|]^q s^(d-1) ds)^(1/q)`.
pub fn tail_integral(
    f: &RadialProfile,
    radius: f64,
    w: f64,
    q: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    Ok(tail_power(f, radius, w, q, quad)?.value.powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn gaussian(d: u32, side: Side) -> RadialProfile {
        let amp = match side {
            Side::Space => 1.0,
            Side::Fourier => (2.0 * PI).powf(f64::from(d) / 2.0),
        };
        RadialProfile::new(d, side, Shape::Gaussian { amp, rate: 0.5 }).unwrap()
    }

    #[test]
    fn gaussian_forward_d1() {
        let g = gaussian(1, Side::Space);
        assert_relative_eq!(
            transform_at(&g, 0.0, &spec()).unwrap(),
            (2.0 * PI).sqrt(),
            max_relative = 1e-12
        );
        let v = transform_at(&g, 1.3, &spec()).unwrap();
        assert_relative_eq!(
            v,
            (2.0 * PI).sqrt() * (-0.845f64).exp(),
            max_relative = 1e-11
        );
    }

    #[test]
    fn ball_indicator_d3() {
        let g = RadialProfile::new(
            3,
            Side::Space,
            Shape::Indicator {
                amp: 1.0,
                radius: 1.0,
            },
        )
        .unwrap();
        for s in [0.5f64, 2.0, 7.0, 30.0] {
            let exact = 4.0 * PI * (s.sin() - s * s.cos()) / s.powi(3);
            assert_relative_eq!(
                transform_at(&g, s, &spec()).unwrap(),
                exact,
                max_relative = 1e-10,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = RadialProfile::zero(2, Side::Space).unwrap();
        let out = fourier_radial(&g, &[0.0, 1.0, 5.0], &spec()).unwrap();
        assert_eq!(out.side, Side::Fourier);
        assert_eq!(out.sample(&[0.0, 1.0, 5.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn exponential_spectrum_inverse_d3() {
        let f = RadialProfile::new(
            3,
            Side::Fourier,
            Shape::Exponential {
                amp: 1.0,
                rate: 1.0,
            },
        )
        .unwrap();
        assert_relative_eq!(
            transform_at(&f, 0.0, &spec()).unwrap(),
            1.0 / (PI * PI),
            max_relative = 1e-12
        );
        // Γ(2) / π² · (1 + r²)^(-2)
        let r = 1.7f64;
        let exact = (1.0 + r * r).powi(-2) / (PI * PI);
        assert_relative_eq!(
            transform_at(&f, r, &spec()).unwrap(),
            exact,
            max_relative = 1e-10
        );
    }

    #[test]
    fn lp_norms() {
        let disk = RadialProfile::new(
            2,
            Side::Space,
            Shape::Indicator {
                amp: 1.0,
                radius: 1.0,
            },
        )
        .unwrap();
        assert_relative_eq!(
            radial_lp_norm(&disk, 1.0, &spec()).unwrap(),
            PI,
            max_relative = 1e-13
        );
        let e = RadialProfile::new(
            1,
            Side::Space,
            Shape::Exponential {
                amp: 1.0,
                rate: 1.0,
            },
        )
        .unwrap();
        assert_relative_eq!(
            radial_lp_norm(&e, 1.0, &spec()).unwrap(),
            2.0,
            max_relative = 1e-12
        );
        let g = gaussian(3, Side::Space);
        assert_relative_eq!(
            radial_lp_norm(&g, 2.0, &spec()).unwrap(),
            PI.powf(0.75),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            radial_lp_norm(&g, f64::INFINITY, &spec()).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        let b = RadialProfile::new(
            1,
            Side::Space,
            Shape::Bessel {
                amp: 1.0,
                nu: 0.0,
                scale: 1.0,
            },
        )
        .unwrap();
        assert_relative_eq!(
            radial_lp_norm(&b, f64::INFINITY, &spec()).unwrap(),
            1.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn slow_tail_norm_diverges() {
        let f = RadialProfile::new(
            1,
            Side::Fourier,
            Shape::PowerTail {
                amp: 1.0,
                exponent: 0.5,
                start: 1.0,
            },
        )
        .unwrap();
        let e = radial_lp_norm(&f, 2.0, &spec()).unwrap_err();
        assert!(e.is_divergence(), "{e}");
    }

    #[test]
    fn shells_and_tails() {
        let f = RadialProfile::new(
            1,
            Side::Fourier,
            Shape::PowerTail {
                amp: 1.0,
                exponent: 1.0,
                start: 1.0,
            },
        )
        .unwrap();
        assert_relative_eq!(
            shell_integral(&f, 2.0, 0.0, 2.0, &spec()).unwrap(),
            0.5f64.sqrt(),
            max_relative = 1e-13
        );
        let f2 = RadialProfile::new(
            2,
            Side::Fourier,
            Shape::PowerTail {
                amp: 1.0,
                exponent: 3.0,
                start: 1.0,
            },
        )
        .unwrap();
        assert_relative_eq!(
            shell_integral(&f2, 1.0, 0.0, 1.0, &spec()).unwrap(),
            PI,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            tail_integral(&f, 10.0, 0.0, 2.0, &spec()).unwrap(),
            0.2f64.sqrt(),
            max_relative = 1e-12
        );
        let z = RadialProfile::zero(2, Side::Fourier).unwrap();
        assert_eq!(shell_integral(&z, 1.0, 0.0, 2.0, &spec()).unwrap(), 0.0);
        let ball = RadialProfile::new(
            2,
            Side::Fourier,
            Shape::Indicator {
                amp: 1.0,
                radius: 3.0,
            },
        )
        .unwrap();
        assert_eq!(tail_integral(&ball, 4.0, 0.0, 2.0, &spec()).unwrap(), 0.0);
    }
}
