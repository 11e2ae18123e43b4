//! Spectral solver and verification toolkit for evolution equations
//! `du/dt = A(t)u (+ f)` whose generators are time-measurable nonlocal
//! (Levy-type) operators.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches
//! files, configuration or threads lives in the companion `nle` crate.
//!
//! Module map:
//!
//! - [`scaling`]: scaling triples `(s, s_L, s_U)` and their derived constants.
//! - [`levy`]: Levy measure models, their symbols, and sampled checks of the
//!   lower-bound and weak-scaling conditions.
//! - [`process`]: time-dependent triplets, characteristic exponents, their time
//!   integrals and scaled processes.
//! - [`grid`]: periodic spectral grids, the discrete Fourier transform and `L_p`
//!   norms.
//! - [`lp_besov`]: Littlewood-Paley windows, scaled Besov norms and
//!   Bessel-potential norms.
//! - [`solver`]: exact-in-frequency propagators, Duhamel term, transition
//!   densities and space-time norms.
//! - [`montecarlo`]: simulation of the underlying additive process for
//!   cross-checking the spectral solver.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod grid;
pub mod levy;
pub mod lp_besov;
pub mod math;
pub mod montecarlo;
pub mod process;
pub mod quad;
pub mod scaling;
pub mod solver;

pub use error::{Error, GridEnd, Result};
pub use num_complex::Complex64;
