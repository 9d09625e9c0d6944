//! Numerical laboratory for the boundary-inflection inner problem
//!
//! ```text
//! i ψ_t = -½ ψ_xx - x t ψ,   x > 0,   ψ(0, t) = 0,
//! ```
//!
//! driven from `t → -∞` by a whispering-gallery Airy mode and observed as
//! `t → +∞` in the searchlight frame `η = x/t - t²/6`.
//!
//! * [`airy`]: Ai, Ai′ and the zeros `-ν_j` in double precision.
//! * [`modes`]: incoming mode data and its all-order modal expansion.
//! * [`evolve`]: unitary Cayley time stepping on a truncated half-line.
//! * [`searchlight`]: frame transforms, amplitude extraction, outgoing
//!   asymptotic solutions.
//! * [`analysis`]: a priori functionals, flux integrals, scattering Gram matrix.

pub mod airy;
pub mod analysis;
mod error;
pub mod evolve;
pub mod modes;
pub mod quadrature;
pub mod searchlight;

pub use error::{Error, Result};

/// Complex scalar used for every field value.
pub type C64 = num_complex::Complex64;
