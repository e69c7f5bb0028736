//! Numerical laboratory for Fourier-decay criteria of generalized Lipschitz
//! and Besov classes of radial functions.
//!
//! Asymptotic claims (`A ≲ B`, `A ≍ B`) are checked as bounded-ratio
//! statements over declared grids; every check returns a [`BoundReport`]
//! carrying the achieved constants.

pub mod catalog;
pub mod error;
pub mod gm;
pub mod majorant;
pub mod multipliers;
pub mod quad;
pub mod radial;
pub mod report;
pub mod smoothness;

pub use error::{Error, Result};
pub use quad::QuadratureSpec;
pub use report::{BoundReport, Verdict};
