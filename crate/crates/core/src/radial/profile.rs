use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bessel::jnu;
use crate::error::{Error, Result};
use crate::quad::{QuadratureSpec, WidthCap};

/// Values below `amp · EFFECTIVE_ZERO` are treated as exact zeros when a shape
/// declares an effective support.
const EFFECTIVE_ZERO: f64 = 1e-17;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which side of the Fourier transform a profile lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Space,
    Fourier,
}

impl Side {
    pub fn flip(self) -> Self {
        match self {
            Side::Space => Side::Fourier,
            Side::Fourier => Side::Space,
        }
    }
}

/// Samples interpolated by 4-point Lagrange polynomials; the first value is
/// held on `[0, x_0)` and the profile vanishes beyond the last abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Samples {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::param(
                "samples",
                "need at least two (x, y) pairs of equal length",
            ));
        }
        if x[0] < 0.0 || x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::param(
                "samples",
                "abscissae must be nonnegative and strictly increasing",
            ));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::non_finite("samples", x[i]));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.x.len();
        if r < self.x[0] {
            return self.y[0];
        }
        if r > self.x[n - 1] {
            return 0.0;
        }
        let i = match self.x.partition_point(|&v| v <= r) {
            0 => 0,
            k => k - 1,
        };
        if self.x[i] == r {
            return self.y[i];
        }
        let lo = i.saturating_sub(1).min(n.saturating_sub(4));
        let hi = (lo + 4).min(n);
        let mut acc = 0.0;
        for j in lo..hi {
            let mut l = 1.0;
            for m in lo..hi {
                if m != j {
                    l *= (r - self.x[m]) / (self.x[j] - self.x[m]);
                }
            }
            acc += l * self.y[j];
        }
        acc
    }
}

/// A user-supplied profile with its quadrature hints.
#[derive(Clone)]
pub struct CustomShape {
    pub label: String,
    pub f: ScalarFn,
    pub derivative: Option<ScalarFn>,
    pub breaks: Vec<f64>,
    pub jumps: Vec<(f64, f64)>,
    pub cap: WidthCap,
    pub support: Option<f64>,
}

impl fmt::Debug for CustomShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomShape")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

/// Pointwise factor applied to a base profile.
#[derive(Clone)]
pub struct Factor {
    pub label: String,
    pub f: ScalarFn,
    pub cap: WidthCap,
    pub breaks: Vec<f64>,
}

impl fmt::Debug for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Factor")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

/// Radial shapes with the structure the quadrature needs (breakpoints,
/// oscillation scale, effective support) exposed.
#[derive(Debug, Clone)]
pub enum Shape {
    Zero,
    /// `amp · exp(-rate r²)`
    Gaussian {
        amp: f64,
        rate: f64,
    },
    /// `amp · exp(-rate r)`
    Exponential {
        amp: f64,
        rate: f64,
    },
    /// `amp · 1[r <= radius]`
    Indicator {
        amp: f64,
        radius: f64,
    },
    /// `amp · r^(-exponent) · 1[r >= start]`
    PowerTail {
        amp: f64,
        exponent: f64,
        start: f64,
    },
    /// `amp · j_ν(scale r)`
    Bessel {
        amp: f64,
        nu: f64,
        scale: f64,
    },
    /// `amp · (1 + r²)^(-power)`
    PoissonKernel {
        amp: f64,
        power: f64,
    },
    Sampled(Samples),
    Custom(CustomShape),
    Multiplied {
        base: Box<Shape>,
        factor: Factor,
    },
    /// Radial transform of another profile, evaluated lazily.
    Transformed {
        source: Arc<RadialProfile>,
        quad: QuadratureSpec,
    },
}

impl Shape {
    pub fn eval(&self, r: f64) -> Result<f64> {
        let v = match self {
            Shape::Zero => 0.0,
            Shape::Gaussian { amp, rate } => amp * (-rate * r * r).exp(),
            Shape::Exponential { amp, rate } => amp * (-rate * r).exp(),
            Shape::Indicator { amp, radius } => {
                if r <= *radius {
                    *amp
                } else {
                    0.0
                }
            }
            Shape::PowerTail {
                amp,
                exponent,
                start,
            } => {
                if r >= *start {
                    amp * r.powf(-exponent)
                } else {
                    0.0
                }
            }
            Shape::Bessel { amp, nu, scale } => amp * jnu(*nu, scale * r),
            Shape::PoissonKernel { amp, power } => amp * (1.0 + r * r).powf(-power),
            Shape::Sampled(s) => s.eval(r),
            Shape::Custom(c) => (c.f)(r),
            Shape::Multiplied { base, factor } => {
                let b = base.eval(r)?;
                if b == 0.0 {
                    0.0
                } else {
                    b * (factor.f)(r)
                }
            }
            Shape::Transformed { source, quad } => super::transform::transform_at(source, r, quad)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::non_finite("profile", r))
        }
    }

    /// Points where the profile or its derivative jumps.
    pub fn breaks(&self) -> Vec<f64> {
        match self {
            Shape::Indicator { radius, .. } => vec![*radius],
            Shape::PowerTail { start, .. } => vec![*start],
            Shape::Sampled(s) => s.x.clone(),
            Shape::Custom(c) => c.breaks.clone(),
            Shape::Multiplied { base, factor } => {
                let mut b = base.breaks();
                b.extend_from_slice(&factor.breaks);
                b
            }
            _ => Vec::new(),
        }
    }

    /// Radius beyond which the profile is zero (or below double precision).
    pub fn support(&self) -> Option<f64> {
        match self {
            Shape::Zero => Some(0.0),
            Shape::Gaussian { rate, .. } => Some((-EFFECTIVE_ZERO.ln() / rate).sqrt() * 1.25),
            Shape::Exponential { rate, .. } => Some(-EFFECTIVE_ZERO.ln() / rate * 1.5),
            Shape::Indicator { radius, .. } => Some(*radius),
            Shape::Sampled(s) => s.x.last().copied(),
            Shape::Custom(c) => c.support,
            Shape::Multiplied { base, .. } => base.support(),
            _ => None,
        }
    }

    /// Panel-width cap resolving the profile's own oscillation.
    pub fn cap(&self) -> WidthCap {
        match self {
            Shape::Bessel { scale, .. } => WidthCap::quarter_period(*scale),
            Shape::Custom(c) => c.cap,
            Shape::Multiplied { base, factor } => base.cap().min(factor.cap),
            _ => WidthCap::NONE,
        }
    }

    /// Closed-form derivative away from [`Shape::jumps`], when available.
    pub fn derivative(&self, r: f64) -> Option<f64> {
        Some(match self {
            Shape::Zero | Shape::Indicator { .. } => 0.0,
            Shape::Gaussian { amp, rate } => -2.0 * rate * r * amp * (-rate * r * r).exp(),
            Shape::Exponential { amp, rate } => -rate * amp * (-rate * r).exp(),
            Shape::PowerTail {
                amp,
                exponent,
                start,
            } => {
                if r > *start {
                    -exponent * amp * r.powf(-exponent - 1.0)
                } else {
                    0.0
                }
            }
            Shape::Bessel { amp, nu, scale } => {
                let u = scale * r;
                -amp * scale * u / (2.0 * (nu + 1.0)) * jnu(nu + 1.0, u)
            }
            Shape::PoissonKernel { amp, power } => {
                -2.0 * power * r * amp * (1.0 + r * r).powf(-power - 1.0)
            }
            Shape::Custom(c) => return c.derivative.as_ref().map(|d| d(r)),
            _ => return None,
        })
    }

    /// Jump discontinuities as `(location, g(loc+) - g(loc-))`.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        match self {
            Shape::Indicator { amp, radius } => vec![(*radius, -amp)],
            Shape::PowerTail {
                amp,
                exponent,
                start,
            } if *start > 0.0 => {
                vec![(*start, amp * start.powf(-exponent))]
            }
            Shape::Custom(c) => c.jumps.clone(),
            _ => Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Shape::Zero => true,
            Shape::Gaussian { amp, .. }
            | Shape::Exponential { amp, .. }
            | Shape::Indicator { amp, .. }
            | Shape::PowerTail { amp, .. }
            | Shape::Bessel { amp, .. }
            | Shape::PoissonKernel { amp, .. } => *amp == 0.0,
            Shape::Sampled(s) => s.y.iter().all(|v| *v == 0.0),
            Shape::Multiplied { base, .. } => base.is_zero(),
            Shape::Transformed { source, .. } => source.shape.is_zero(),
            Shape::Custom(_) => false,
        }
    }

    pub fn multiplied(self, factor: Factor) -> Shape {
        if matches!(self, Shape::Zero) {
            return Shape::Zero;
        }
        Shape::Multiplied {
            base: Box::new(self),
            factor,
        }
    }
}

/// A radial function `x ↦ g(|x|)` on `R^d`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub d: u32,
    pub side: Side,
    pub shape: Shape,
    pub provenance: String,
}

impl RadialProfile {
    pub fn new(d: u32, side: Side, shape: Shape) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", "dimension must be at least 1"));
        }
        Ok(Self {
            d,
            side,
            shape,
            provenance: "closed_form".into(),
        })
    }

    pub fn with_provenance(mut self, p: impl Into<String>) -> Self {
        self.provenance = p.into();
        self
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::OutOfDomain {
                t: r,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        self.shape.eval(r)
    }

    pub fn zero(d: u32, side: Side) -> Result<Self> {
        Self::new(d, side, Shape::Zero)
    }

    /// Values on a grid, computed in parallel.
    pub fn sample(&self, grid: &[f64]) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        grid.par_iter().map(|&r| self.eval(r)).collect()
    }

    /// Replaces the shape by its samples on `grid`.
    pub fn resample(&self, grid: &[f64]) -> Result<Self> {
        let y = self.sample(grid)?;
        Ok(Self {
            d: self.d,
            side: self.side,
            shape: Shape::Sampled(Samples::new(grid.to_vec(), y)?),
            provenance: self.provenance.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cubic_samples_are_reproduced() {
        let x: Vec<f64> = (0..12)
            .map(|i| 0.3 * f64::from(i) + 0.01 * f64::from(i * i))
            .collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - 2.0 * v + v * v * v).collect();
        let s = Samples::new(x, y).unwrap();
        for r in [0.05, 0.77, 2.0, 3.3] {
            assert_relative_eq!(s.eval(r), 1.0 - 2.0 * r + r * r * r, max_relative = 1e-12);
        }
        assert_eq!(s.eval(100.0), 0.0);
    }

    #[test]
    fn samples_reject_bad_grids() {
        assert!(Samples::new(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(Samples::new(vec![1.0, 2.0], vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        let shapes = [
            Shape::Gaussian {
                amp: 2.0,
                rate: 0.5,
            },
            Shape::Exponential {
                amp: 1.0,
                rate: 1.0,
            },
            Shape::Bessel {
                amp: 1.0,
                nu: 0.0,
                scale: 2.0,
            },
            Shape::PoissonKernel {
                amp: 1.0,
                power: 2.0,
            },
            Shape::PowerTail {
                amp: 1.0,
                exponent: 1.5,
                start: 1.0,
            },
        ];
        for s in &shapes {
            for r in [0.4, 1.7, 3.1] {
                let h = 1e-6;
                let fd = (s.eval(r + h).unwrap() - s.eval(r - h).unwrap()) / (2.0 * h);
                assert_relative_eq!(
                    s.derivative(r).unwrap(),
                    fd,
                    max_relative = 1e-6,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn effective_support_is_negligible() {
        let g = Shape::Gaussian {
            amp: 1.0,
            rate: 0.5,
        };
        let r = g.support().unwrap();
        assert!(g.eval(r).unwrap() * r.powi(4) < 1e-16);
        let e = Shape::Exponential {
            amp: 1.0,
            rate: 1.0,
        };
        let r = e.support().unwrap();
        assert!(e.eval(r).unwrap() * r.powi(4) < 1e-16);
    }

    #[test]
    fn rejects_zero_dimension_and_negative_radius() {
        assert!(RadialProfile::new(0, Side::Space, Shape::Zero).is_err());
        let p = RadialProfile::new(1, Side::Space, Shape::Zero).unwrap();
        assert!(p.eval(-1.0).is_err());
    }
}
