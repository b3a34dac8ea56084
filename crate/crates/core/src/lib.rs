//! Wave-packet propagation under a GUP-modified dispersion relation.
//!
//! The crate has three layers that check one another:
//!
//! - [`dispersion`] evaluates `ω(k) = kc/(1 + α′ l_p² k²)` and everything
//!   derived from it in closed form (group velocity, GVD coefficient β,
//!   effective Planck constant, `E′(p)`), plus first-order approximants.
//! - [`packet`] gives the closed-form Gaussian packet under the quadratic
//!   expansion of ω and its broadening law; [`spectral`] evolves arbitrary
//!   spectra under the *exact* ω by Fourier synthesis and measures the
//!   packet's centroid and RMS width.
//! - [`gkg`] integrates the fourth-order generalized Klein-Gordon equation,
//!   spectrally and by leapfrog finite differences, and applies the
//!   generalized momentum operator.
//!
//! [`harness`] wires these into reproducible experiments with CSV and JSON
//! output.
//!
//! ```
//! use gupsim::dispersion::DispersionModel;
//!
//! let m = DispersionModel::new(-0.01)?; // natural units, l_p = c = ħ = 1
//! let v = m.group_velocity_exact(1.0)?;
//! assert!(v > m.c());
//! # Ok::<(), gupsim::Error>(())
//! ```

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dispersion;
mod error;
pub mod field;
mod fourier;
pub mod gkg;
pub mod grid;
pub mod harness;
pub mod packet;
pub mod spectral;

pub use error::{Error, Result};

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/dispersion.md")]
    mod dispersion {}
    #[doc = include_str!("../../../book/src/packets.md")]
    mod packets {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/klein_gordon.md")]
    mod klein_gordon {}
    #[doc = include_str!("../../../book/src/momentum.md")]
    mod momentum {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
