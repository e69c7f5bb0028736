//! Normalized Bessel kernels, radial Fourier transforms in `R^d`, radial
//! `L^p` norms and dyadic shell/tail integrals of Fourier profiles.
//!
//! Convention: `f̂(ξ) = ∫ f(x) e^{iξ·x} dx`. For radial `f(x) = f₀(|x|)`,
//! `F₀(s) = σ_{d-1} ∫ r^(d-1) f₀(r) j_{d/2-1}(rs) dr` and the inverse carries
//! the extra factor `(2π)^(-d)`.

mod bessel;
pub mod io;
mod profile;
mod transform;

pub use bessel::{normalized_bessel, radial_kernel, sphere_area};
pub use profile::{CustomShape, Factor, RadialProfile, Samples, ScalarFn, Shape, Side};
pub use transform::{
    fourier_radial, fourier_radial_lazy, inverse_norm_probe, radial_lp_norm, shell_integral,
    tail_integral, tail_power, transform_at, transform_constant, NormProbe,
};

/// Where a pair came from.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm(String),
    Computed,
}

/// A space-side profile and its Fourier-side partner.
#[derive(Debug, Clone)]
pub struct RadialPair {
    pub d: u32,
    pub space: RadialProfile,
    pub fourier: RadialProfile,
    pub provenance: Provenance,
}

impl RadialPair {
    pub fn new(
        space: RadialProfile,
        fourier: RadialProfile,
        provenance: Provenance,
    ) -> crate::Result<Self> {
        if space.d != fourier.d {
            return Err(crate::Error::param(
                "d",
                "space and Fourier profiles disagree on dimension",
            ));
        }
        if space.side != Side::Space || fourier.side != Side::Fourier {
            return Err(crate::Error::param(
                "side",
                "pair needs a space profile and a Fourier profile",
            ));
        }
        Ok(Self {
            d: space.d,
            space,
            fourier,
            provenance,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.fourier.shape.is_zero()
    }
}
